"""A minimal simple-graph type shared by the coloring and lifting code."""
from __future__ import annotations

from dataclasses import dataclass

from dppmle.errors import StructuralInputError


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph on nodes ``0..n-1``; edge order is significant."""

    n: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        edges = tuple((min(int(a), int(b)), max(int(a), int(b))) for a, b in self.edges)
        seen = set()
        for a, b in edges:
            if a == b:
                raise StructuralInputError(f"self-loop at node {a}")
            if not (0 <= a < self.n and 0 <= b < self.n):
                raise StructuralInputError(f"edge ({a}, {b}) out of range [0, {self.n})")
            if (a, b) in seen:
                raise StructuralInputError(f"parallel edge ({a}, {b})")
            seen.add((a, b))
        object.__setattr__(self, "edges", edges)

    @property
    def n_nodes(self) -> int:
        return self.n

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def degrees(self) -> list[int]:
        deg = [0] * self.n
        for a, b in self.edges:
            deg[a] += 1
            deg[b] += 1
        return deg

    def adjacency(self) -> list[list[int]]:
        adj = [[] for _ in range(self.n)]
        for a, b in self.edges:
            adj[a].append(b)
            adj[b].append(a)
        return adj


def as_graph(G) -> Graph:
    """Accept a :class:`Graph`, a ``BotGraph`` or an ``(n, edges)`` pair."""
    if isinstance(G, Graph):
        return G
    if hasattr(G, "n_nodes") and hasattr(G, "edges"):
        return Graph(G.n_nodes, tuple(G.edges))
    n, edges = G
    return Graph(int(n), tuple(edges))


def complete_graph(n: int) -> Graph:
    return Graph(n, tuple((a, b) for a in range(n) for b in range(a + 1, n)))


def path_graph(n: int) -> Graph:
    return Graph(n, tuple((a, a + 1) for a in range(n - 1)))


def graph_to_json(G: Graph) -> dict:
    return {"n": G.n, "edges": [list(e) for e in G.edges]}
