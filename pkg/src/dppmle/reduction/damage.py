"""Edge-deletion robustness: which gadgets, literal pairs and clauses survive
the removal of an edge set, and the iterated trimming of the expander.

Definitions used
----------------
* A gadget is *broken* when any of its edges is deleted.
* An expander connection (one expander edge, i.e. three block-equality
  gadgets) is broken when any of its three gadgets is broken.
* A literal node is *isolated* when, with ``k > 1``, all ``k - 1`` equality
  gadgets joining it to the other copies are broken, or when all ``d``
  expander connections of its triangle are broken.
* A literal pair is *damaged* when one of its 9 own edges is deleted or
  either literal node is isolated.
* A clause is *destroyed* when its gadget lost an edge or one of its three
  literals belongs to a damaged pair.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

from dppmle.errors import StructuralInputError
from dppmle.reduction.bot import BotGraph
from dppmle.reduction.expander import ExpanderSpec


@dataclass(frozen=True)
class DamageReport:
    deleted: tuple[int, ...]
    broken_gadgets: frozenset
    broken_connections: frozenset
    isolated_literals: frozenset
    damaged_pairs: frozenset
    destroyed_clauses: frozenset
    m: int

    @property
    def survived_clauses(self) -> int:
        return self.m - len(self.destroyed_clauses)

    @property
    def claim_bound(self) -> int:
        return self.m - 2 * len(self.deleted)

    @property
    def bound_holds(self) -> bool:
        return self.survived_clauses >= self.claim_bound

    def to_json(self) -> dict:
        return {"deleted": len(self.deleted),
                "broken_gadgets": sorted(self.broken_gadgets),
                "isolated_literals": sorted(self.isolated_literals),
                "damaged_pairs": sorted(self.damaged_pairs),
                "destroyed_clauses": sorted(self.destroyed_clauses),
                "survived_clauses": self.survived_clauses,
                "claim_bound": self.claim_bound, "bound_holds": self.bound_holds}


def _edge_ids(G: BotGraph, deleted: Iterable) -> tuple[int, ...]:
    index = None
    out = set()
    for e in deleted:
        if isinstance(e, (int,)) and not isinstance(e, bool):
            if not 0 <= e < G.n_edges:
                raise StructuralInputError(f"unknown edge id {e}")
            out.add(int(e))
        else:
            if index is None:
                index = G.edge_index()
            key = frozenset(int(x) for x in e)
            if key not in index:
                raise StructuralInputError(f"unknown edge {tuple(e)}")
            out.add(index[key])
    return tuple(sorted(out))


def classify_damage(G: BotGraph, deleted: Iterable,
                    extra_broken_connections: Iterable[int] = ()) -> DamageReport:
    """Classify the damage caused by deleting ``deleted`` from ``G``.

    Parameters
    ----------
    G : BotGraph
    deleted : iterable
        Edge ids or ``(u, v)`` node pairs.
    extra_broken_connections : iterable of int
        Expander-edge ids to treat as broken in addition to those implied by
        the deletions (used by the decoder after trimming).

    Raises
    ------
    StructuralInputError
        An edge that is not in ``G``.
    """
    ids = _edge_ids(G, deleted)
    dset = set(ids)
    broken = frozenset(G.edge_owner[t] for t in ids
                       if G.edge_kind[t] in ("literal_eq", "block_eq", "clause"))
    conn = set(extra_broken_connections)
    for gid in broken:
        g = G.gadgets[gid]
        if g.kind == "block_eq":
            conn.add(g.expander_edge)

    lit_gadgets: dict[int, list[int]] = {}
    for g in G.gadgets:
        if g.kind == "literal_eq":
            for x in g.ends:
                lit_gadgets.setdefault(x, []).append(g.id)
    block_conns: dict[int, list[int]] = {}
    for e, (b1, b2) in enumerate(G.expander.edges):
        block_conns.setdefault(b1, []).append(e)
        block_conns.setdefault(b2, []).append(e)

    isolated = set()
    damaged = set()
    for pid, p in enumerate(G.pairs):
        if any(t in dset for t in p.edges):
            damaged.add(pid)
        for neg in (False, True):
            x = p.literal(neg)
            block = 2 * pid + int(neg)
            eqs = lit_gadgets.get(x, [])
            iso = G.k > 1 and bool(eqs) and all(g in broken for g in eqs)
            conns = block_conns.get(block, [])
            iso = iso or (bool(conns) and all(e in conn for e in conns))
            if iso:
                isolated.add(x)
                damaged.add(pid)

    lit_pair = {}
    for pid, p in enumerate(G.pairs):
        lit_pair[p.pos] = pid
        lit_pair[p.neg] = pid
    destroyed = set()
    for g in G.gadgets:
        if g.kind != "clause":
            continue
        if g.id in broken or any(lit_pair[x] in damaged for x in g.ends):
            destroyed.add(g.clause)
    return DamageReport(ids, broken, frozenset(conn), frozenset(isolated), frozenset(damaged),
                        frozenset(destroyed), G.formula.m)


@dataclass(frozen=True)
class TrimReport:
    surviving: frozenset
    removed: tuple[int, ...]
    threshold: float
    deleted: int
    in_regime: bool
    removal_bound: float

    @property
    def within_bound(self) -> bool:
        return len(self.removed) <= self.removal_bound

    def to_json(self) -> dict:
        return {"surviving": sorted(self.surviving), "removed": list(self.removed),
                "threshold": self.threshold, "deleted": self.deleted,
                "in_regime": self.in_regime, "removal_bound": self.removal_bound,
                "within_bound": self.within_bound}


def trim_dense(expander: ExpanderSpec, deleted: Iterable, threshold: Optional[float] = None
               ) -> TrimReport:
    """Iteratively delete vertices of degree below ``threshold``.

    The default threshold is ``3d/4 + 2``.  Deleted edges may be given as
    expander-edge ids or vertex pairs.  The removed-vertex count is reported
    against ``15 |deleted| / d`` together with whether ``|deleted|`` is in
    the regime ``<= count * d / 150`` where that bound is expected; nothing
    is asserted.
    """
    d = expander.d
    thr = 0.75 * d + 2 if threshold is None else float(threshold)
    index = {e: t for t, e in enumerate(expander.edges)}
    dset = set()
    for e in deleted:
        if isinstance(e, int) and not isinstance(e, bool):
            if not 0 <= e < len(expander.edges):
                raise StructuralInputError(f"unknown expander edge id {e}")
            dset.add(e)
        else:
            a, b = e
            key = (min(a, b), max(a, b))
            if key not in index:
                raise StructuralInputError(f"unknown expander edge {key}")
            dset.add(index[key])
    adj = [set() for _ in range(expander.count)]
    for t, (a, b) in enumerate(expander.edges):
        if t not in dset:
            adj[a].add(b)
            adj[b].add(a)
    alive = set(range(expander.count))
    removed = []
    queue = sorted(v for v in alive if len(adj[v]) < thr)
    while queue:
        nxt = []
        for v in queue:
            if v not in alive:
                continue
            alive.discard(v)
            removed.append(v)
            for u in adj[v]:
                adj[u].discard(v)
            adj[v].clear()
        nxt = sorted(v for v in alive if len(adj[v]) < thr)
        queue = nxt
    nd = len(dset)
    return TrimReport(frozenset(alive), tuple(removed), thr, nd,
                      nd <= expander.count * d / 150, 15 * nd / d if d else float("inf"))
