"""Lift a graph to a 3-uniform hypergraph and its training dataset.

Ground-set element ``u`` (``0 <= u < |V|``) is vertex ``u``; element
``|V| + t`` is the fresh node placed on edge ``t``.  Edge ``t = (u, v)``
becomes the sample ``{u, v, |V| + t}``.
"""
from __future__ import annotations

from dataclasses import dataclass

from dppmle.dataset import Dataset
from dppmle.graph import Graph, as_graph


@dataclass(frozen=True)
class LiftedInstance:
    graph: Graph
    hyperedges: tuple[tuple[int, int, int], ...]
    dataset: Dataset

    @property
    def n_vertices(self) -> int:
        return self.graph.n

    @property
    def N(self) -> int:
        return self.graph.n + self.graph.n_edges

    def edge_node(self, t: int) -> int:
        return self.graph.n + t

    def labels(self) -> list[str]:
        return ([f"a_{u}" for u in range(self.graph.n)]
                + [f"a_({a},{b})" for a, b in self.graph.edges])


def lift_to_hypergraph(G) -> LiftedInstance:
    """Hyperedges ``(u, v, edge-node)`` in edge construction order."""
    g = as_graph(G)
    hyper = tuple((a, b, g.n + t) for t, (a, b) in enumerate(g.edges))
    N = g.n + g.n_edges
    return LiftedInstance(g, hyper, Dataset(N, hyper))
