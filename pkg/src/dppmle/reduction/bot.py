"""Construction of the bounded-degree reduction graph from a 3-CNF formula.

Layout
------
Each variable ``i`` gets ``k`` copies.  Copy ``j`` is a *literal pair*: two
literal nodes ``x``/``x~`` and two colour triangles ``(T, F, D)`` and
``(T~, F~, D~)``, with edges ``x - x~``, ``x - D`` and ``x~ - D~``.  Each
triangle is one vertex (a *block*) of the expander; block ids are
``2 * (i * k + j) + negated`` with ``i`` 0-based.

Gadgets
-------
* equality gadget between ``x`` and ``y``: aux ``u, v`` with edges
  ``x-u, x-v, y-u, y-v, u-v``; any proper 3-colouring gives ``x`` and ``y``
  the same colour.
* the ``k`` copies of each literal are joined pairwise by equality gadgets;
* every expander edge ``(b, b')`` gets three equality gadgets
  ``T_b=T_b'``, ``F_b=F_b'``, ``D_b=D_b'``;
* a clause ``(l_a, l_b, l_c)`` uses a fresh copy of each literal and adds
  ``u_p`` adjacent to ``l_p`` and to the ``T`` node of that literal's own
  triangle, ``v_p`` adjacent to ``u_p``, and a triangle on ``v_a, v_b, v_c``.
  With all three literals coloured False every ``u_p`` is forced to the
  dummy colour and the ``v`` triangle cannot be coloured.

Node ids are assigned in construction order: literal pairs (per variable,
per copy: ``x, x~, T, F, D, T~, F~, D~``), then literal-equality aux nodes,
then expander-gadget aux nodes, then clause aux nodes.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

from dppmle.errors import CapacityError, ParameterError, StructuralInputError
from dppmle.reduction.cnf import CnfFormula
from dppmle.reduction.expander import ExpanderSpec, expander_from_edges

COLOR_ROLES = ("true", "false", "dummy")
AUX_ROLES = ("eq_u", "eq_v", "clause_u", "clause_v")
EDGE_KINDS = ("block", "literal_pair", "literal_dummy", "literal_eq", "block_eq", "clause")


@dataclass(frozen=True)
class Node:
    id: int
    role: str
    var: Optional[int] = None        # 1-based variable number
    negated: Optional[bool] = None
    copy: Optional[int] = None       # 0-based copy index
    gadget: Optional[int] = None
    clause: Optional[int] = None     # 0-based clause index
    position: Optional[str] = None   # 'a' / 'b' / 'c' inside a clause gadget

    def to_json(self) -> dict:
        return {"id": self.id, "role": self.role, "var": self.var, "negated": self.negated,
                "copy": self.copy, "gadget": self.gadget, "clause": self.clause,
                "position": self.position}


@dataclass(frozen=True)
class Gadget:
    """A gadget and the edges it owns.

    ``ends`` are the two nodes forced equal (equality gadgets) or the three
    literal nodes (clause gadgets); ``anchors`` holds the three ``T`` nodes
    a clause gadget attaches to.
    """

    id: int
    kind: str
    aux: tuple[int, ...]
    ends: tuple[int, ...]
    edges: tuple[int, ...]
    anchors: tuple[int, ...] = ()
    clause: Optional[int] = None
    expander_edge: Optional[int] = None
    color: Optional[str] = None

    def to_json(self) -> dict:
        return {"id": self.id, "kind": self.kind, "aux": list(self.aux), "ends": list(self.ends),
                "edges": list(self.edges), "anchors": list(self.anchors), "clause": self.clause,
                "expander_edge": self.expander_edge, "color": self.color}


@dataclass(frozen=True)
class LiteralPair:
    """Copy ``copy`` of variable ``var``: the 8 nodes and 9 edges of one block pair."""

    var: int
    copy: int
    pos: int
    neg: int
    pos_triangle: tuple[int, int, int]   # T, F, D
    neg_triangle: tuple[int, int, int]
    edges: tuple[int, ...]

    def literal(self, negated: bool) -> int:
        return self.neg if negated else self.pos

    def triangle(self, negated: bool) -> tuple[int, int, int]:
        return self.neg_triangle if negated else self.pos_triangle


@dataclass
class BotGraph:
    formula: CnfFormula
    k: int
    d: int
    seed: int
    expander: ExpanderSpec
    nodes: list[Node] = field(default_factory=list)
    edges: list[tuple[int, int]] = field(default_factory=list)
    edge_kind: list[str] = field(default_factory=list)
    edge_owner: list[Optional[int]] = field(default_factory=list)
    gadgets: list[Gadget] = field(default_factory=list)
    pairs: list[LiteralPair] = field(default_factory=list)
    clause_copies: list[tuple[int, ...]] = field(default_factory=list)

    # ---- basic graph views -------------------------------------------------
    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def degrees(self) -> list[int]:
        deg = [0] * self.n_nodes
        for a, b in self.edges:
            deg[a] += 1
            deg[b] += 1
        return deg

    def max_degree(self) -> int:
        return max(self.degrees(), default=0)

    def adjacency(self) -> list[list[int]]:
        adj = [[] for _ in range(self.n_nodes)]
        for a, b in self.edges:
            adj[a].append(b)
            adj[b].append(a)
        return adj

    def degree_cap(self) -> int:
        return max(2 * self.d + 3, 2 * self.k + 1)

    # ---- lookups ------------------------------------------------------------
    def pair(self, var: int, copy: int) -> LiteralPair:
        """Literal pair of 1-based ``var``, 0-based ``copy``."""
        return self.pairs[(var - 1) * self.k + copy]

    def block_triangle(self, block: int) -> tuple[int, int, int]:
        p = self.pairs[block // 2]
        return p.triangle(bool(block % 2))

    def block_literal(self, block: int) -> int:
        return self.pairs[block // 2].literal(bool(block % 2))

    def edge_index(self) -> dict:
        return {frozenset(e): t for t, e in enumerate(self.edges)}

    def literal_nodes(self) -> list[int]:
        return [nd.id for nd in self.nodes if nd.role == "literal"]

    # ---- serialization ------------------------------------------------------
    def to_json(self) -> dict:
        return {
            "meta": {"n_vars": self.formula.n_vars, "m_clauses": self.formula.m, "k": self.k,
                     "d": self.d, "seed": self.seed,
                     "clauses": [list(c) for c in self.formula.clauses]},
            "nodes": [nd.to_json() for nd in self.nodes],
            "edges": [list(e) for e in self.edges],
            "edge_tags": [[kd, ow] for kd, ow in zip(self.edge_kind, self.edge_owner)],
            "gadgets": [g.to_json() for g in self.gadgets],
            "expander_edges": self.expander.to_json(),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json()) + "\n"


def _add_node(G: BotGraph, **kw) -> int:
    nid = len(G.nodes)
    G.nodes.append(Node(id=nid, **kw))
    return nid


def _add_edge(G: BotGraph, a: int, b: int, kind: str, owner: Optional[int]) -> int:
    G.edges.append((min(a, b), max(a, b)))
    G.edge_kind.append(kind)
    G.edge_owner.append(owner)
    return len(G.edges) - 1


def _equality(G: BotGraph, x: int, y: int, kind: str, **extra) -> int:
    gid = len(G.gadgets)
    u = _add_node(G, role="eq_u", gadget=gid)
    v = _add_node(G, role="eq_v", gadget=gid)
    eids = tuple(_add_edge(G, a, b, kind, gid)
                 for a, b in ((x, u), (x, v), (y, u), (y, v), (u, v)))
    G.gadgets.append(Gadget(id=gid, kind=kind, aux=(u, v), ends=(x, y), edges=eids, **extra))
    return gid


def build_bot_graph(phi: CnfFormula, expander: ExpanderSpec, k: Optional[int] = None) -> BotGraph:
    """Build the reduction graph of ``phi`` over the given expander.

    Parameters
    ----------
    phi : CnfFormula
    expander : ExpanderSpec
        Must have exactly ``2 * k * phi.n_vars`` vertices.
    k : int, optional
        Copies per literal; defaults to ``phi.k``.

    Raises
    ------
    ParameterError
        Expander size mismatch.
    CapacityError
        Some literal occurs in more than ``k`` clauses.
    """
    k = phi.k if k is None else int(k)
    n = phi.n_vars
    if k < 1:
        raise ParameterError("k must be >= 1")
    if expander.count != 2 * k * n:
        raise ParameterError(
            f"expander has {expander.count} vertices, need 2*k*n = {2 * k * n}")
    for lit, c in phi.literal_occurrences().items():
        if c > k:
            raise CapacityError(f"literal {lit} occurs in {c} clauses but only k={k} copies exist")
    G = BotGraph(formula=phi, k=k, d=expander.d, seed=expander.seed, expander=expander)

    for i in range(1, n + 1):
        for j in range(k):
            pid = len(G.pairs)
            x = _add_node(G, role="literal", var=i, negated=False, copy=j)
            xn = _add_node(G, role="literal", var=i, negated=True, copy=j)
            tri = tuple(_add_node(G, role=r, var=i, negated=False, copy=j) for r in COLOR_ROLES)
            trin = tuple(_add_node(G, role=r, var=i, negated=True, copy=j) for r in COLOR_ROLES)
            eids = []
            for t in (tri, trin):
                eids += [_add_edge(G, t[0], t[1], "block", pid),
                         _add_edge(G, t[1], t[2], "block", pid),
                         _add_edge(G, t[0], t[2], "block", pid)]
            eids.append(_add_edge(G, x, xn, "literal_pair", pid))
            eids.append(_add_edge(G, x, tri[2], "literal_dummy", pid))
            eids.append(_add_edge(G, xn, trin[2], "literal_dummy", pid))
            G.pairs.append(LiteralPair(i, j, x, xn, tri, trin, tuple(eids)))

    for i in range(1, n + 1):
        for neg in (False, True):
            for j in range(k):
                for j2 in range(j + 1, k):
                    _equality(G, G.pair(i, j).literal(neg), G.pair(i, j2).literal(neg),
                              "literal_eq")

    for e, (b1, b2) in enumerate(expander.edges):
        t1, t2 = G.block_triangle(b1), G.block_triangle(b2)
        for c in range(3):
            _equality(G, t1[c], t2[c], "block_eq", expander_edge=e, color="TFD"[c])

    used: dict[int, int] = {}
    for ci, clause in enumerate(phi.clauses):
        lits, anchors, copies = [], [], []
        for lit in clause:
            j = used.get(lit, 0)
            used[lit] = j + 1
            p = G.pair(abs(lit), j)
            lits.append(p.literal(lit < 0))
            anchors.append(p.triangle(lit < 0)[0])
            copies.append(j)
        G.clause_copies.append(tuple(copies))
        gid = len(G.gadgets)
        us = [_add_node(G, role="clause_u", gadget=gid, clause=ci, position="abc"[p])
              for p in range(3)]
        vs = [_add_node(G, role="clause_v", gadget=gid, clause=ci, position="abc"[p])
              for p in range(3)]
        eids = []
        for p in range(3):
            eids.append(_add_edge(G, anchors[p], us[p], "clause", gid))
            eids.append(_add_edge(G, lits[p], us[p], "clause", gid))
            eids.append(_add_edge(G, us[p], vs[p], "clause", gid))
        eids += [_add_edge(G, vs[0], vs[1], "clause", gid),
                 _add_edge(G, vs[1], vs[2], "clause", gid),
                 _add_edge(G, vs[0], vs[2], "clause", gid)]
        G.gadgets.append(Gadget(id=gid, kind="clause", aux=tuple(us + vs), ends=tuple(lits),
                                edges=tuple(eids), anchors=tuple(anchors), clause=ci))
    return G


def expected_counts(n: int, k: int, d: int, m: int) -> dict:
    """Closed-form node and edge tallies, split by class."""
    nodes = {"literal": 2 * n * k, "color": 6 * n * k, "literal_eq": 2 * n * k * (k - 1),
             "block_eq": 6 * n * k * d, "clause": 6 * m}
    edges = {"block_pair": 9 * n * k, "literal_eq": 5 * n * k * (k - 1),
             "block_eq": 15 * n * k * d, "clause": 12 * m}
    return {"nodes": nodes, "edges": edges,
            "n_nodes": sum(nodes.values()), "n_edges": sum(edges.values())}


@dataclass(frozen=True)
class CountAudit:
    expected_nodes: int
    actual_nodes: int
    expected_edges: int
    actual_edges: int
    mismatched_classes: tuple[str, ...]
    offending_gadgets: tuple[int, ...]
    offending_pairs: tuple[int, ...]

    @property
    def passed(self) -> bool:
        return (self.expected_nodes == self.actual_nodes
                and self.expected_edges == self.actual_edges
                and not self.mismatched_classes and not self.offending_gadgets
                and not self.offending_pairs)

    def to_json(self) -> dict:
        return {"passed": self.passed, "expected_nodes": self.expected_nodes,
                "actual_nodes": self.actual_nodes, "expected_edges": self.expected_edges,
                "actual_edges": self.actual_edges,
                "mismatched_classes": list(self.mismatched_classes),
                "offending_gadgets": list(self.offending_gadgets),
                "offending_pairs": list(self.offending_pairs)}


_EDGE_CLASS = {"block": "block_pair", "literal_pair": "block_pair",
               "literal_dummy": "block_pair", "literal_eq": "literal_eq",
               "block_eq": "block_eq", "clause": "clause"}
_NODE_CLASS = {"literal": "literal", "true": "color", "false": "color", "dummy": "color",
               "clause_u": "clause", "clause_v": "clause"}


def count_audit(G: BotGraph) -> CountAudit:
    """Compare the graph against the closed-form tallies.

    Checks whole-graph totals, per-class totals, and per-gadget / per-pair
    edge counts (5 per equality gadget, 12 per clause gadget, 9 per pair), so
    a deleted edge is traced to the gadget that owns it.
    """
    exp = expected_counts(G.formula.n_vars, G.k, G.d, G.formula.m)
    node_cls = {c: 0 for c in exp["nodes"]}
    gadget_kind = {g.id: g.kind for g in G.gadgets}
    for nd in G.nodes:
        if nd.role in ("eq_u", "eq_v"):
            node_cls[gadget_kind[nd.gadget]] += 1
        else:
            node_cls[_NODE_CLASS[nd.role]] += 1
    edge_cls = {c: 0 for c in exp["edges"]}
    per_gadget: dict[int, int] = {}
    per_pair: dict[int, int] = {}
    for kind, owner in zip(G.edge_kind, G.edge_owner):
        edge_cls[_EDGE_CLASS[kind]] += 1
        if _EDGE_CLASS[kind] == "block_pair":
            per_pair[owner] = per_pair.get(owner, 0) + 1
        else:
            per_gadget[owner] = per_gadget.get(owner, 0) + 1
    bad_cls = tuple(sorted(
        [f"nodes:{c}" for c in exp["nodes"] if node_cls[c] != exp["nodes"][c]]
        + [f"edges:{c}" for c in exp["edges"] if edge_cls[c] != exp["edges"][c]]))
    bad_g = tuple(g.id for g in G.gadgets
                  if per_gadget.get(g.id, 0) != (12 if g.kind == "clause" else 5))
    bad_p = tuple(p for p in range(len(G.pairs)) if per_pair.get(p, 0) != 9)
    return CountAudit(exp["n_nodes"], G.n_nodes, exp["n_edges"], G.n_edges,
                      bad_cls, bad_g, bad_p)


def without_edges(G: BotGraph, deleted) -> BotGraph:
    """Copy of ``G`` with the given edge ids removed; provenance is kept and
    gadget/pair edge lists are re-indexed."""
    drop = set(deleted)
    for t in drop:
        if not 0 <= t < G.n_edges:
            raise StructuralInputError(f"unknown edge id {t}")
    remap, keep = {}, []
    for t in range(G.n_edges):
        if t not in drop:
            remap[t] = len(keep)
            keep.append(t)
    H = BotGraph(formula=G.formula, k=G.k, d=G.d, seed=G.seed, expander=G.expander,
                 nodes=list(G.nodes), clause_copies=list(G.clause_copies))
    H.edges = [G.edges[t] for t in keep]
    H.edge_kind = [G.edge_kind[t] for t in keep]
    H.edge_owner = [G.edge_owner[t] for t in keep]
    H.gadgets = [Gadget(g.id, g.kind, g.aux, g.ends,
                        tuple(remap[t] for t in g.edges if t in remap), g.anchors, g.clause,
                        g.expander_edge, g.color) for g in G.gadgets]
    H.pairs = [LiteralPair(p.var, p.copy, p.pos, p.neg, p.pos_triangle, p.neg_triangle,
                           tuple(remap[t] for t in p.edges if t in remap)) for p in G.pairs]
    return H


def bot_graph_from_json(obj) -> BotGraph:
    """Inverse of :meth:`BotGraph.to_json`.

    Raises
    ------
    StructuralInputError
        Missing keys or inconsistent ids.
    """
    try:
        meta = obj["meta"]
        phi = CnfFormula(int(meta["n_vars"]), tuple(tuple(c) for c in meta["clauses"]))
        k, d, seed = int(meta["k"]), int(meta["d"]), int(meta["seed"])
        exp = expander_from_edges(2 * k * phi.n_vars, d, seed, obj["expander_edges"])
        G = BotGraph(formula=phi, k=k, d=d, seed=seed, expander=exp)
        for t, nd in enumerate(obj["nodes"]):
            if nd["id"] != t:
                raise StructuralInputError(f"node ids must be 0..N-1 in order (at {t})")
            G.nodes.append(Node(id=t, role=nd["role"], var=nd.get("var"),
                                negated=nd.get("negated"), copy=nd.get("copy"),
                                gadget=nd.get("gadget"), clause=nd.get("clause"),
                                position=nd.get("position")))
        G.edges = [(min(a, b), max(a, b)) for a, b in obj["edges"]]
        G.edge_kind = [t[0] for t in obj["edge_tags"]]
        G.edge_owner = [t[1] for t in obj["edge_tags"]]
        G.gadgets = [Gadget(id=g["id"], kind=g["kind"], aux=tuple(g["aux"]),
                            ends=tuple(g["ends"]), edges=tuple(g["edges"]),
                            anchors=tuple(g.get("anchors", ())), clause=g.get("clause"),
                            expander_edge=g.get("expander_edge"), color=g.get("color"))
                     for g in obj["gadgets"]]
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise StructuralInputError(f"malformed graph file: {exc!r}") from None
    if len(G.edge_kind) != len(G.edges):
        raise StructuralInputError("edge_tags length differs from edges")
    by_pair: dict[int, list[int]] = {}
    for t, (kind, owner) in enumerate(zip(G.edge_kind, G.edge_owner)):
        if kind in ("block", "literal_pair", "literal_dummy"):
            by_pair.setdefault(owner, []).append(t)
    lit = {}
    col = {}
    for nd in G.nodes:
        if nd.role == "literal":
            lit[(nd.var, nd.negated, nd.copy)] = nd.id
        elif nd.role in COLOR_ROLES:
            col[(nd.role, nd.var, nd.negated, nd.copy)] = nd.id
    for i in range(1, phi.n_vars + 1):
        for j in range(k):
            pid = len(G.pairs)
            tri = tuple(col[(r, i, False, j)] for r in COLOR_ROLES)
            trin = tuple(col[(r, i, True, j)] for r in COLOR_ROLES)
            G.pairs.append(LiteralPair(i, j, lit[(i, False, j)], lit[(i, True, j)], tri, trin,
                                       tuple(by_pair.get(pid, ()))))
    used: dict[int, int] = {}
    for clause in phi.clauses:
        cp = []
        for x in clause:
            cp.append(used.get(x, 0))
            used[x] = cp[-1] + 1
        G.clause_copies.append(tuple(cp))
    return G


def load_bot_graph(text: str) -> BotGraph:
    from dppmle.errors import ParseError
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON: {exc.msg}", exc.lineno, exc.colno) from None
    return bot_graph_from_json(obj)
