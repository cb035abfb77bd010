"""Discrete 3-colourings: checking, an exact backtracking solver, and the
colouring induced by a satisfying assignment.

Colours are the integers 1, 2, 3.  In colourings built from assignments,
1 is the True colour, 2 the False colour and 3 the dummy colour.
"""
from __future__ import annotations

import itertools
from typing import Mapping, Optional, Sequence

from dppmle.errors import ColoringError, ValidationError
from dppmle.graph import as_graph

TRUE, FALSE, DUMMY = 1, 2, 3
_ROLE_COLOR = {"true": TRUE, "false": FALSE, "dummy": DUMMY}
_FULL = 0b111
_POP = [bin(i).count("1") for i in range(8)]


def _color_list(G, colors) -> list[int]:
    n = as_graph(G).n
    if isinstance(colors, Mapping):
        out = []
        for v in range(n):
            if v not in colors:
                raise ValidationError(f"node {v} has no colour")
            out.append(int(colors[v]))
    else:
        out = [int(c) for c in colors]
        if len(out) != n:
            raise ValidationError(f"colouring has {len(out)} entries for {n} nodes")
    for v, c in enumerate(out):
        if c not in (1, 2, 3):
            raise ValidationError(f"node {v} has colour {c}, expected 1, 2 or 3")
    return out


def check_proper(G, colors) -> tuple[bool, list[tuple[int, int]]]:
    """Return ``(is_proper, monochromatic_edges)``.

    Raises
    ------
    ValidationError
        A node without a colour or with a colour outside ``{1, 2, 3}``.
    """
    g = as_graph(G)
    col = _color_list(g, colors)
    bad = [(a, b) for a, b in g.edges if col[a] == col[b]]
    return not bad, bad


class _Solver:
    """Domain-bitmask backtracking with forward checking.

    Propagation rules:

    * a node fixed to colour ``c`` removes ``c`` from its neighbours;
    * two adjacent nodes with the same two-colour domain use up both colours,
      so those colours are removed from their common neighbours.

    The second rule makes equality gadgets and triangles propagate without
    search.
    """

    def __init__(self, n, adj):
        self.n = n
        self.adj = adj
        self.adjset = [set(a) for a in adj]

    def propagate(self, dom: list[int], work: list[int]) -> bool:
        adj, adjset = self.adj, self.adjset
        while work:
            v = work.pop()
            dv = dom[v]
            if dv == 0:
                return False
            p = _POP[dv]
            if p == 1:
                for u in adj[v]:
                    if dom[u] & dv:
                        dom[u] &= ~dv & _FULL
                        if dom[u] == 0:
                            return False
                        work.append(u)
            elif p == 2:
                for u in adj[v]:
                    if dom[u] == dv:
                        for w in adjset[v] & adjset[u]:
                            if dom[w] & dv:
                                dom[w] &= ~dv & _FULL
                                if dom[w] == 0:
                                    return False
                                work.append(w)
        return True

    def choose(self, dom, priority) -> int:
        for v in priority:
            if _POP[dom[v]] > 1:
                return v
        best, bp = -1, 4
        for v in range(self.n):
            p = _POP[dom[v]]
            if 1 < p < bp:
                best, bp = v, p
                if p == 2:
                    break
        return best

    def solve(self, dom, priority, node_limit) -> Optional[list[int]]:
        if not self.propagate(dom, list(range(self.n))):
            return None
        stack = [(dom, None, ())]
        explored = 0
        while stack:
            dom, v, rest = stack.pop()
            if v is not None:
                if rest:
                    stack.append((dom, v, rest[1:]))
                c = rest[0] if rest else None
                if c is None:
                    continue
                nd = list(dom)
                nd[v] = c
                explored += 1
                if node_limit and explored > node_limit:
                    raise ColoringError(f"search exceeded {node_limit} branch nodes")
                if not self.propagate(nd, [v]):
                    continue
                dom = nd
            u = self.choose(dom, priority)
            if u < 0:
                return [{1: 1, 2: 2, 4: 3}[d] for d in dom]
            opts = tuple(1 << b for b in range(3) if dom[u] >> b & 1)
            stack.append((dom, u, opts))
        return None


def three_color(G, priority: Sequence[int] = (), fixed: Optional[Mapping[int, int]] = None,
                node_limit: int = 0) -> Optional[list[int]]:
    """Exact 3-colouring by backtracking, or ``None`` if none exists.

    Parameters
    ----------
    G : graph-like
    priority : sequence of int
        Nodes branched on first, in this order (e.g. literal nodes).
    fixed : mapping, optional
        Pre-assigned colours.  Without it, the first triangle (or first edge)
        is fixed to distinct colours, which loses no generality.
    node_limit : int
        Abort with :class:`ColoringError` after this many branches (0 = no cap).
    """
    g = as_graph(G)
    adj = g.adjacency()
    dom = [_FULL] * g.n
    if fixed:
        for v, c in fixed.items():
            dom[v] = 1 << (int(c) - 1)
    elif g.edges:
        a, b = g.edges[0]
        common = sorted(set(adj[a]) & set(adj[b]))
        dom[a], dom[b] = 1, 2
        if common:
            dom[common[0]] = 4
    solver = _Solver(g.n, adj)
    return solver.solve(dom, list(priority), node_limit)


def literal_priority(G) -> list[int]:
    """Literal nodes of a reduction graph in construction order."""
    return [nd.id for nd in G.nodes if nd.role == "literal"]


def _complete_local(adj, colors: list[Optional[int]], aux: Sequence[int]) -> bool:
    aux = list(aux)
    for combo in itertools.product((1, 2, 3), repeat=len(aux)):
        for v, c in zip(aux, combo):
            colors[v] = c
        if all(colors[u] is None or colors[u] != colors[v] for v in aux for u in adj[v]):
            return True
    for v in aux:
        colors[v] = None
    return False


def assignment_to_coloring(G, assignment: Sequence[bool]) -> list[int]:
    """Proper colouring of a reduction graph from a satisfying assignment.

    T/F/D nodes get colours 1/2/3, a literal copy gets 1 when the literal is
    true and 2 otherwise, and each gadget's auxiliary nodes are completed by
    exhaustive search over at most ``3^6`` local colourings.

    Raises
    ------
    ValidationError
        The assignment violates a clause (the first one is named).
    ColoringError
        A gadget could not be completed.  This cannot happen for satisfying
        assignments; it is reachable only through :func:`complete_gadget`.
    """
    phi = G.formula
    sat = phi.satisfied(list(assignment))
    if not all(sat):
        j = sat.index(False)
        raise ValidationError(f"assignment violates clause {j + 1}: {phi.clauses[j]}")
    colors: list[Optional[int]] = [None] * G.n_nodes
    for nd in G.nodes:
        if nd.role in _ROLE_COLOR:
            colors[nd.id] = _ROLE_COLOR[nd.role]
        elif nd.role == "literal":
            val = bool(assignment[nd.var - 1]) != bool(nd.negated)
            colors[nd.id] = TRUE if val else FALSE
    adj = G.adjacency()
    for g in G.gadgets:
        if not _complete_local(adj, colors, g.aux):
            raise ColoringError(f"gadget {g.id} ({g.kind}) could not be completed")
    return [int(c) for c in colors]


def complete_gadget(G, colors: Sequence[Optional[int]], gadget_id: int) -> list[int]:
    """Complete one gadget's auxiliary colours given the rest.

    Raises
    ------
    ColoringError
        No proper completion exists.
    """
    cols = list(colors)
    g = G.gadgets[gadget_id]
    for v in g.aux:
        cols[v] = None
    if not _complete_local(G.adjacency(), cols, g.aux):
        raise ColoringError(f"gadget {g.id} ({g.kind}) has no proper completion")
    return [cols[v] for v in g.aux]
