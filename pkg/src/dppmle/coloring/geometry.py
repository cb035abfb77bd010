"""Spherical-geometry helpers: numeric checks of the gadget robustness facts
and the sphere max-min search used by the rank-3 projection.

All angles are sign-folded: ``v`` and ``-v`` are the same colour direction.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from dppmle import _accel


# ---------------------------------------------------------------------------
# sphere grids
# ---------------------------------------------------------------------------

@lru_cache(maxsize=8)
def icosphere(level: int) -> np.ndarray:
    """Vertices of the ``level``-times subdivided icosahedron (unit norm).

    Neighbouring vertices are about ``63.4 / 2**level`` degrees apart.
    """
    p = (1 + math.sqrt(5)) / 2
    verts = [(-1, p, 0), (1, p, 0), (-1, -p, 0), (1, -p, 0), (0, -1, p), (0, 1, p),
             (0, -1, -p), (0, 1, -p), (p, 0, -1), (p, 0, 1), (-p, 0, -1), (-p, 0, 1)]
    faces = [(0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11), (1, 5, 9), (5, 11, 4),
             (11, 10, 2), (10, 7, 6), (7, 1, 8), (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8),
             (3, 8, 9), (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1)]
    V = [np.array(v, dtype=float) / np.linalg.norm(v) for v in verts]
    for _ in range(level):
        cache: dict = {}

        def mid(i, j):
            key = (min(i, j), max(i, j))
            if key not in cache:
                w = V[i] + V[j]
                V.append(w / np.linalg.norm(w))
                cache[key] = len(V) - 1
            return cache[key]

        nf = []
        for a, b, c in faces:
            ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
            nf += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = nf
    out = np.array(V)
    out.setflags(write=False)
    return out


def _level_for(resolution_deg: float) -> int:
    return max(0, math.ceil(math.log2(63.43 / resolution_deg)))


def _local_grid(center: np.ndarray, spacing: float, half: int = 4) -> np.ndarray:
    a = np.eye(3)[int(np.argmin(np.abs(center)))]
    e1 = np.cross(center, a)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(center, e1)
    s = np.arange(-half, half + 1) * spacing
    A, B = np.meshgrid(s, s, indexing="ij")
    P = center[None, :] + A.reshape(-1, 1) * e1 + B.reshape(-1, 1) * e2
    return P / np.linalg.norm(P, axis=1, keepdims=True)


_SIGNS = ((1.0, 1.0, 1.0), (1.0, 1.0, -1.0), (1.0, -1.0, 1.0), (1.0, -1.0, -1.0))


def _exact_candidates(N: np.ndarray, max_triples: int = 40) -> list[np.ndarray]:
    """Directions where the max-min can be attained with few active terms.

    One active neighbour: any orthogonal direction.  Two: their cross
    product.  Three: the equalizer ``z`` with ``|<z, n_i>|`` equal for the
    triple, i.e. ``z`` proportional to ``N_sub^{-1} s`` for a sign vector ``s``.
    """
    k = N.shape[0]
    out = []
    for i in range(k):
        a = np.eye(3)[int(np.argmin(np.abs(N[i])))]
        y = np.cross(N[i], a)
        out.append(y / np.linalg.norm(y))
        for j in range(i + 1, k):
            y = np.cross(N[i], N[j])
            ny = np.linalg.norm(y)
            if ny > 1e-12:
                out.append(y / ny)
    if k <= max_triples:
        for i in range(k):
            for j in range(i + 1, k):
                for l in range(j + 1, k):
                    M = N[[i, j, l]]
                    if abs(np.linalg.det(M)) < 1e-12:
                        continue
                    for s in _SIGNS:
                        z = np.linalg.solve(M, np.array(s))
                        out.append(z / np.linalg.norm(z))
    return out


@dataclass(frozen=True)
class SphereSearch:
    direction: np.ndarray
    value: float
    history: tuple[float, ...]


def sphere_argmax(neighbors, resolution_deg: float = 2.0, refinements: int = 3,
                  keep: int = 8) -> SphereSearch:
    """Approximately maximize ``min_j sin^2 angle(z, n_j)`` over unit ``z``.

    Exact candidates (a direction orthogonal to one neighbour, cross products
    of neighbour pairs) are scored together with an icosahedral grid at
    ``resolution_deg``; the ``keep`` best grid points are refined
    ``refinements`` times, halving the spacing each pass.  ``history`` holds
    the incumbent after each pass and never decreases.
    """
    N = np.asarray(neighbors, dtype=float).reshape(-1, 3)
    if N.shape[0]:
        nrm = np.linalg.norm(N, axis=1)
        N = N[nrm > 1e-15] / nrm[nrm > 1e-15, None]
    if N.shape[0] == 0:
        z = np.array([0.0, 0.0, 1.0])
        return SphereSearch(z, 1.0, (1.0,))
    cands = _exact_candidates(N)
    grid = icosphere(_level_for(resolution_deg))
    P = np.vstack([np.array(cands), grid])
    vals = _accel.sphere_min_sin2(P, N)
    order = np.argsort(-vals, kind="stable")
    best_i = int(order[0])
    best_z, best_v = P[best_i].copy(), float(vals[best_i])
    history = [best_v]
    seeds = [P[i] for i in order[:keep]]
    spacing = math.radians(resolution_deg)
    for _ in range(refinements):
        spacing /= 2.0
        new_seeds = []
        for c in seeds:
            L = _local_grid(c, spacing)
            lv = _accel.sphere_min_sin2(L, N)
            j = int(np.argmax(lv))
            new_seeds.append(L[j])
            if lv[j] > best_v:
                best_v, best_z = float(lv[j]), L[j].copy()
        seeds = new_seeds
        history.append(best_v)
    return SphereSearch(best_z, best_v, tuple(history))


# ---------------------------------------------------------------------------
# numeric checks of the robustness facts
# ---------------------------------------------------------------------------

def _unit(x):
    return x / np.linalg.norm(x, axis=-1, keepdims=True)


def _rotations(rng, size):
    G = rng.standard_normal((size, 3, 3))
    Q, R = np.linalg.qr(G)
    return Q * np.sign(np.diagonal(R, axis1=1, axis2=2))[:, None, :]


@dataclass(frozen=True)
class ClaimCheck:
    accepted: int
    violations: int
    worst_margin: float
    max_t: float

    @property
    def holds(self) -> bool:
        return self.violations == 0

    def to_json(self) -> dict:
        return {"accepted": self.accepted, "violations": self.violations,
                "worst_margin": self.worst_margin, "max_t": self.max_t, "holds": self.holds}


def check_near_frame_claim(samples: int = 100_000, seed: int = 0,
                           t_max: float = 0.2, batch: int = 20_000) -> ClaimCheck:
    """Near-orthonormal frames pin down a fourth vector.

    For unit ``a, b, c, d`` with ``|<a,b>|, |<b,c>|, |<c,a>|, |<d,b>|,
    |<d,c>| <= t <= 1/5``, check ``|<a,d>| >= 1 - 5 t^2``.  ``t`` is taken
    as the largest of the five inner products of each sample, so the
    inequality is tested at its tightest admissible value.  Samples are
    perturbed random frames biased toward the ``t = 1/5`` boundary.
    """
    rng = np.random.default_rng(seed)
    acc = viol = 0
    worst = math.inf
    tmax_seen = 0.0
    while acc < samples:
        R = _rotations(rng, batch)
        s = rng.uniform(0.0, 0.3, size=(batch, 1))
        a = _unit(R[:, :, 0] + s * rng.standard_normal((batch, 3)))
        b = _unit(R[:, :, 1] + s * rng.standard_normal((batch, 3)))
        c = _unit(R[:, :, 2] + s * rng.standard_normal((batch, 3)))
        w = rng.uniform(-0.25, 0.25, size=(batch, 2))
        sign = rng.choice([-1.0, 1.0], size=(batch, 1))
        d = _unit(sign * a + w[:, :1] * b + w[:, 1:] * c
                  + rng.uniform(0, 0.3, (batch, 1)) * rng.standard_normal((batch, 3)))
        ip = lambda x, y: np.abs(np.einsum("ij,ij->i", x, y))
        t = np.max(np.stack([ip(a, b), ip(b, c), ip(c, a), ip(d, b), ip(d, c)]), axis=0)
        ok = t <= t_max
        margin = ip(a, d)[ok] - (1.0 - 5.0 * t[ok] ** 2)
        take = min(int(ok.sum()), samples - acc)
        margin = margin[:take]
        acc += take
        viol += int(np.sum(margin < -1e-12))
        if take:
            worst = min(worst, float(margin.min()))
            tmax_seen = max(tmax_seen, float(t[ok][:take].max()))
    return ClaimCheck(acc, viol, worst, tmax_seen)


def check_simple_clause_claim(samples: int = 100_000, seed: int = 1, t0: float = 0.98,
                              eps_max: float = 0.07, batch: int = 20_000) -> ClaimCheck:
    """Two vectors orthogonal to a non-aligned pair ``T, l`` are nearly parallel.

    With ``|<D,T>|, |<D,l>|, |<u,T>|, |<u,l>| <= eps`` and ``|<T,l>| <= t0``
    check ``|<D,u>| >= 1 - 202 eps^2``.  ``max_t`` reports the largest eps.
    """
    rng = np.random.default_rng(seed)
    acc = viol = 0
    worst = math.inf
    emax = 0.0
    while acc < samples:
        R = _rotations(rng, batch)
        T = R[:, :, 0]
        ang = rng.uniform(math.acos(t0), math.pi / 2, size=(batch, 1))
        ell = math.cos(0) * (np.cos(ang) * T + np.sin(ang) * R[:, :, 1])
        perp = R[:, :, 2]
        s = rng.uniform(0, 0.08, size=(batch, 1))
        D = _unit(perp + s * rng.standard_normal((batch, 3)))
        u = _unit(rng.choice([-1.0, 1.0], size=(batch, 1)) * perp
                  + s * rng.standard_normal((batch, 3)))
        ip = lambda x, y: np.abs(np.einsum("ij,ij->i", x, y))
        eps = np.max(np.stack([ip(D, T), ip(D, ell), ip(u, T), ip(u, ell)]), axis=0)
        ok = (eps <= eps_max) & (ip(T, ell) <= t0)
        margin = ip(D, u)[ok] - (1.0 - 202.0 * eps[ok] ** 2)
        take = min(int(ok.sum()), samples - acc)
        margin = margin[:take]
        acc += take
        viol += int(np.sum(margin < -1e-12))
        if take:
            worst = min(worst, float(margin.min()))
            emax = max(emax, float(eps[ok][:take].max()))
    return ClaimCheck(acc, viol, worst, emax)


def latlong_grid(step_deg: float = 5.0, hemisphere: bool = True) -> np.ndarray:
    """Latitude/longitude grid containing the coordinate axes.

    With ``hemisphere`` set only one of each ``+-v`` pair is kept (sign
    folding makes the other redundant).
    """
    pts = []
    for th in np.arange(0.0, 180.0 + 1e-9, step_deg):
        if th in (0.0, 180.0):
            pts.append((0.0, 0.0, math.cos(math.radians(th))))
            continue
        for ph in np.arange(0.0, 360.0, step_deg):
            t, p = math.radians(th), math.radians(ph)
            pts.append((math.sin(t) * math.cos(p), math.sin(t) * math.sin(p), math.cos(t)))
    P = np.array(pts)
    P[np.abs(P) < 1e-15] = 0.0
    if hemisphere:
        key = np.where(P[:, 2] != 0, P[:, 2], np.where(P[:, 1] != 0, P[:, 1], P[:, 0]))
        P = P[key > 0]
    return P


@dataclass(frozen=True)
class ClauseGridCheck:
    grid_points: int
    far_u: int
    candidate_v: int
    triples_found: int
    control_triples_found: int

    @property
    def holds(self) -> bool:
        return self.triples_found == 0 and self.control_triples_found > 0

    def to_json(self) -> dict:
        return {"grid_points": self.grid_points, "far_u": self.far_u,
                "candidate_v": self.candidate_v, "triples_found": self.triples_found,
                "control_triples_found": self.control_triples_found, "holds": self.holds}


def _count_frames(V: np.ndarray, tol: float, limit: int = 1) -> int:
    """Count (up to ``limit``) near-orthonormal triples drawn from ``V``."""
    if V.shape[0] < 3:
        return 0
    C = np.abs(V @ V.T) <= tol
    found = 0
    for i in range(V.shape[0]):
        js = np.nonzero(C[i, i + 1:])[0] + i + 1
        for j in js:
            ks = np.nonzero(C[i, j + 1:] & C[j, j + 1:])[0]
            if ks.size:
                found += 1
                if found >= limit:
                    return found
    return found


def check_clause_gadget_grid(step_deg: float = 5.0, tol_deg: float = 3.0,
                             t0: float = 0.98) -> ClauseGridCheck:
    """Grid search for a clause-gadget configuration with no literal near True.

    The colour axes are fixed to ``T = e3`` and ``D = e2``.  A vector ``u``
    is *reachable with a far literal* if ``u`` is near-orthogonal to ``T``
    and to some grid literal ``l`` that is near-orthogonal to ``D`` with
    ``|<l, T>| <= t0``.  A ``v`` node must be near-orthogonal to its ``u``;
    the three ``v`` nodes must be pairwise near-orthogonal.  The check looks
    for three such ``v`` (each backed by some far ``u``) and expects none.
    As a control, literals equal to ``T`` are also allowed, which must admit
    a solution so that the grid and tolerance are not vacuous.
    """
    P = latlong_grid(step_deg)
    tol = math.sin(math.radians(tol_deg))
    T = np.array([0.0, 0.0, 1.0])
    D = np.array([0.0, 1.0, 0.0])

    def reachable_u(lits):
        U = P[np.abs(P @ T) <= tol]
        ok = (np.abs(U @ lits.T) <= tol).any(axis=1)
        return U[ok]

    def v_candidates(U):
        return P[(np.abs(P @ U.T) <= tol).any(axis=1)] if U.shape[0] else P[:0]

    L = P[np.abs(P @ D) <= tol]
    far = L[np.abs(L @ T) <= t0]
    U_far = reachable_u(far)
    V_far = v_candidates(U_far)
    n_far = _count_frames(V_far, tol)

    # control: one literal may sit on T; the frame needs two v's backed by a
    # far u and one backed by a u reachable from the true literal.
    U_true = reachable_u(T[None, :])
    V_true = v_candidates(U_true)
    ctrl = 0
    if V_true.shape[0] and V_far.shape[0] >= 2:
        C = np.abs(V_far @ V_far.T) <= tol
        for va in V_true:
            m = np.abs(V_far @ va) <= tol
            sub = C[np.ix_(m, m)]
            if np.any(np.triu(sub, 1)):
                ctrl += 1
                break
    return ClauseGridCheck(P.shape[0], U_far.shape[0], V_far.shape[0], n_far, ctrl)
