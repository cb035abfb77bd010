"""Recover a truth assignment from a vector 3-colouring of a reduction graph.

Procedure
---------
1. An edge is *good* when its sign-folded angle is at least
   ``pi/2 - slack``; the others are treated as deleted.
2. Deleted block-equality edges become deletions of their expander edge; the
   expander is trimmed, and the damage classification is run on the deleted
   edges.  A literal pair *survives* when it is undamaged and both of its
   triangles outlive the trimming.
3. The first surviving pair fixes the axes: True is its ``T`` direction,
   False its ``F`` direction orthogonalized against True, and Dummy the
   cross product.
4. Every colour node of a surviving pair is checked to lie within
   ``delta_p`` of its axis (up to sign); violations go to diagnostics.
5. A variable is true when all surviving copies of ``x`` are within the
   literal threshold of True, false when all surviving copies of ``~x`` are,
   and otherwise free (set to false).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from dppmle.coloring.vector import as_vectors
from dppmle.errors import DecodeError, ParameterError
from dppmle.reduction.damage import classify_damage, trim_dense


@dataclass(frozen=True)
class DecoderParams:
    """Thresholds of the decoder (radians).

    Must satisfy ``0 < slack < delta_p < literal_threshold < pi/4``.
    ``trim_threshold`` defaults to ``min(3d/4 + 2, d)`` so that an intact
    expander vertex is never trimmed.
    """

    slack: float = math.pi / 600
    delta_p: float = math.pi / 300
    literal_threshold: float = math.pi / 12
    trim_threshold: float | None = None

    def __post_init__(self):
        if not 0 < self.slack < self.delta_p < self.literal_threshold < math.pi / 4:
            raise ParameterError(
                "need 0 < slack < delta_p < literal_threshold < pi/4, got "
                f"{self.slack}, {self.delta_p}, {self.literal_threshold}")


@dataclass
class DecodeResult:
    assignment: list[bool]
    satisfied_fraction: float
    free_variables: list[int] = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"assignment": self.assignment, "satisfied_fraction": self.satisfied_fraction,
                "free_variables": self.free_variables, "diagnostics": self.diagnostics}


def folded_angle(x: np.ndarray, y: np.ndarray) -> float:
    """Angle between two unit vectors after identifying ``v`` with ``-v``."""
    return math.acos(min(1.0, abs(float(x @ y))))


def decode_assignment(G, vectors, params: DecoderParams | None = None) -> DecodeResult:
    """Decode a truth assignment from per-node vectors of a reduction graph.

    Vectors are renormalized; norms off by more than 1e-6 are rejected.

    Raises
    ------
    DecodeError
        No literal pair survives.
    """
    params = params or DecoderParams()
    X = as_vectors(G, vectors)
    X = X / np.linalg.norm(X, axis=1, keepdims=True)
    e = np.array(G.edges)
    cos = np.abs(np.einsum("ij,ij->i", X[e[:, 0]], X[e[:, 1]]))
    ang = np.arccos(np.minimum(cos, 1.0))
    bad = [int(t) for t in np.nonzero(ang < math.pi / 2 - params.slack)[0]]

    exp_del = sorted({G.gadgets[G.edge_owner[t]].expander_edge for t in bad
                      if G.edge_kind[t] == "block_eq"})
    thr = params.trim_threshold
    if thr is None:
        thr = min(0.75 * G.d + 2, G.d)
    trim = trim_dense(G.expander, exp_del, threshold=thr)
    dmg = classify_damage(G, bad)
    survived = [pid for pid in range(len(G.pairs))
                if pid not in dmg.damaged_pairs
                and 2 * pid in trim.surviving and 2 * pid + 1 in trim.surviving]
    diag: dict = {"bad_edges": len(bad), "expander_deletions": len(exp_del),
                  "trimmed_blocks": len(trim.removed), "damaged_pairs": len(dmg.damaged_pairs),
                  "destroyed_clauses": len(dmg.destroyed_clauses),
                  "survived_pairs": len(survived), "region_violations": []}
    if not survived:
        raise DecodeError("no literal pair survived; cannot fix the colour axes")

    anchor = G.pairs[survived[0]]
    t_ax = X[anchor.pos_triangle[0]].copy()
    f_raw = X[anchor.pos_triangle[1]] - (X[anchor.pos_triangle[1]] @ t_ax) * t_ax
    if np.linalg.norm(f_raw) < 1e-12:
        raise DecodeError("anchor T and F vectors are parallel")
    f_ax = f_raw / np.linalg.norm(f_raw)
    d_ax = np.cross(t_ax, f_ax)
    axes = (t_ax, f_ax, d_ax)
    diag["anchor_pair"] = survived[0]

    for pid in survived:
        p = G.pairs[pid]
        for tri in (p.pos_triangle, p.neg_triangle):
            for c, v in enumerate(tri):
                a = folded_angle(X[v], axes[c])
                if a > params.delta_p:
                    diag["region_violations"].append({"node": v, "axis": "TFD"[c], "angle": a})

    by_var: dict[int, list[int]] = {}
    for pid in survived:
        by_var.setdefault(G.pairs[pid].var, []).append(pid)
    assignment, free = [], []
    lit_thr = params.literal_threshold
    for i in range(1, G.formula.n_vars + 1):
        pids = by_var.get(i, [])
        if pids and all(folded_angle(X[G.pairs[p].pos], t_ax) <= lit_thr for p in pids):
            assignment.append(True)
        elif pids and all(folded_angle(X[G.pairs[p].neg], t_ax) <= lit_thr for p in pids):
            assignment.append(False)
        else:
            assignment.append(False)
            free.append(i)
    frac = G.formula.satisfied_fraction(assignment)
    return DecodeResult(assignment, frac, free, diag)
