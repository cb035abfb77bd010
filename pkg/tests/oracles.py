"""Independent reference computations used by the tests.

Everything here is deliberately naive: inclusion-exclusion over supersets,
explicit determinants of principal minors, central finite differences.
"""
from __future__ import annotations

import itertools
import math
import random

import numpy as np

from dppmle.graph import Graph


def det_minor(K: np.ndarray, S) -> float:
    S = list(S)
    if not S:
        return 1.0
    return float(np.linalg.det(K[np.ix_(S, S)]))


def point_probability_ie(K: np.ndarray, X) -> float:
    """``Pr[Y = X]`` by inclusion-exclusion over supersets of ``X``."""
    n = K.shape[0]
    X = set(X)
    rest = [i for i in range(n) if i not in X]
    total = 0.0
    for r in range(len(rest) + 1):
        for extra in itertools.combinations(rest, r):
            total += (-1) ** r * det_minor(K, sorted(X | set(extra)))
    return total


def random_kernel(n: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Random symmetric matrix with spectrum in [0, 1]."""
    U, _ = np.linalg.qr(rng.standard_normal((n, n)))
    lam = rng.uniform(0.0, 1.0, n)
    if rank is not None:
        lam[rank:] = 0.0
    K = (U * lam) @ U.T
    return (K + K.T) / 2.0


def random_feasible_factor(r: int, n: int, rng: np.random.Generator, low: float = 0.1,
                           top: float = 0.9) -> np.ndarray:
    """Random ``r x n`` factor with singular values drawn from ``[low, top]``.

    Keeping the spectrum away from 0 and 1 keeps every sample probability
    well above zero, which is where a fixed-step finite difference is a
    trustworthy reference.
    """
    U, _ = np.linalg.qr(rng.standard_normal((r, r)))
    V, _ = np.linalg.qr(rng.standard_normal((n, n)))
    k = min(r, n)
    s = rng.uniform(low, top, k)
    return (U[:, :k] * s) @ V[:, :k].T


def finite_difference_gradient(f, Q: np.ndarray, h: float = 1e-5) -> np.ndarray:
    g = np.zeros_like(Q)
    for idx in np.ndindex(Q.shape):
        e = np.zeros_like(Q)
        e[idx] = h
        g[idx] = (f(Q + e) - f(Q - e)) / (2 * h)
    return g


def completeness_value(G: Graph) -> float:
    """``3 log m - (1/m) sum_(u,v) (log deg u + log deg v)``."""
    deg = G.degrees()
    m = len(G.edges)
    return 3 * math.log(m) - sum(math.log(deg[u]) + math.log(deg[v]) for u, v in G.edges) / m


def gram_residual_mass(K: np.ndarray, S) -> float:
    """``sum_i det(K_{S+i}) / det(K_S)`` over ``i`` outside ``S``."""
    S = list(S)
    base = det_minor(K, S)
    return sum(det_minor(K, S + [i]) / base for i in range(K.shape[0]) if i not in S)


def random_three_colorable(n_max: int, rng: random.Random) -> Graph:
    """Random graph on at most ``n_max`` vertices with a planted 3-colouring.

    Isolated vertices are dropped and the rest relabelled.
    """
    while True:
        n = rng.randint(3, n_max)
        hidden = [rng.randint(1, 3) for _ in range(n)]
        edges = [(a, b) for a, b in itertools.combinations(range(n), 2)
                 if hidden[a] != hidden[b] and rng.random() < 0.6]
        used = sorted({x for e in edges for x in e})
        if len(edges) >= 2:
            relabel = {v: i for i, v in enumerate(used)}
            return Graph(len(used), tuple((relabel[a], relabel[b]) for a, b in edges))


def brute_force_three_colorable(G: Graph) -> bool:
    for col in itertools.product(range(3), repeat=G.n):
        if all(col[a] != col[b] for a, b in G.edges):
            return True
    return False
