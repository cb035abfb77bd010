"""Colouring-derived kernels, the optimal value of lifted datasets, and vector
3-colourings.

For a graph with ``m`` edges lifted to a dataset, the kernel with columns

    q_u = sqrt(deg(u) / m) * e_{chi(u)}          (vertices)
    q_t = sqrt(1 / m) * e_{chi(t)}               (edge-nodes)

where ``chi(t)`` is the colour missing from edge ``t``'s endpoints, reaches
the frequency lower bound ``3 log m - (1/m) sum_(u,v) (log deg u + log deg v)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Optional

import numpy as np

from dppmle.coloring.discrete import check_proper
from dppmle.errors import ColoringError, DegenerateInstanceError, ValidationError
from dppmle.graph import as_graph
from dppmle.kernel import GramFactor, log_likelihood
from dppmle.reduction.lift import lift_to_hypergraph


def coloring_to_kernel(G, colors) -> GramFactor:
    """Rank-3 factor over the lifted ground set built from a proper colouring.

    Raises
    ------
    ColoringError
        The colouring is not proper (the first monochromatic edge is named).
    """
    g = as_graph(G)
    ok, bad = check_proper(g, colors)
    if not ok:
        raise ColoringError(f"colouring is not proper: edge {bad[0]} is monochromatic")
    if isinstance(colors, Mapping):
        col = [int(colors[v]) for v in range(g.n)]
    else:
        col = [int(c) for c in colors]
    m = g.n_edges
    if m == 0:
        raise DegenerateInstanceError("graph has no edges")
    deg = g.degrees()
    Q = np.zeros((3, g.n + m))
    for u in range(g.n):
        Q[col[u] - 1, u] = math.sqrt(deg[u] / m)
    for t, (a, b) in enumerate(g.edges):
        Q[6 - col[a] - col[b] - 1, g.n + t] = math.sqrt(1.0 / m)
    return GramFactor(Q)


def optimal_value(G) -> float:
    """``3 log m - (1/m) sum over edges of (log deg u + log deg v)``."""
    g = as_graph(G)
    m = g.n_edges
    if m == 0:
        raise DegenerateInstanceError("graph has no edges")
    deg = g.degrees()
    s = math.fsum(math.log(deg[a]) + math.log(deg[b]) for a, b in g.edges)
    return 3.0 * math.log(m) - s / m


def as_vectors(G, vectors, tol: float = 1e-6) -> np.ndarray:
    """Coerce to an ``(n, 3)`` array of unit vectors.

    Raises
    ------
    ValidationError
        Wrong shape, missing node, or a norm differing from 1 by more than ``tol``.
    """
    n = as_graph(G).n
    if isinstance(vectors, Mapping):
        try:
            arr = np.array([vectors[v] for v in range(n)], dtype=float)
        except KeyError as exc:
            raise ValidationError(f"node {exc.args[0]} has no vector") from None
    else:
        arr = np.array(vectors, dtype=float)
    if arr.shape != (n, 3):
        raise ValidationError(f"expected {n} vectors in R^3, got shape {arr.shape}")
    nrm = np.linalg.norm(arr, axis=1)
    badv = np.nonzero(np.abs(nrm - 1.0) > tol)[0]
    if badv.size:
        raise ValidationError(f"node {int(badv[0])} vector has norm {float(nrm[badv[0]])!r}")
    return arr


def vector_error(G, vectors) -> float:
    """Mean over edges of ``<chi_u, chi_v>^2``."""
    g = as_graph(G)
    X = as_vectors(g, vectors)
    if not g.edges:
        return 0.0
    e = np.array(g.edges)
    c = np.einsum("ij,ij->i", X[e[:, 0]], X[e[:, 1]])
    return math.fsum(c * c) / len(g.edges)


def coloring_vectors(colors) -> np.ndarray:
    """Axis vectors ``e_{chi(u)}`` for a discrete colouring."""
    col = np.asarray(list(colors), dtype=int)
    return np.eye(3)[col - 1]


@dataclass(frozen=True)
class AngleLikelihood:
    value: float
    flagged_edges: tuple[int, ...]
    factor: GramFactor


def _orthogonal_unit(x: np.ndarray) -> np.ndarray:
    axis = np.eye(3)[int(np.argmin(np.abs(x)))]
    y = np.cross(x, axis)
    return y / np.linalg.norm(y)


def likelihood_from_angles(G, vectors, norms: Optional[np.ndarray] = None) -> AngleLikelihood:
    """Likelihood of the rank-3 kernel with given vertex directions.

    Edge-node directions are the normalized cross product of the endpoint
    directions, so each edge-node is orthogonal to both endpoints and the
    sample probability factors as ``|q_u|^2 |q_v|^2 |q_t|^2 sin^2(theta_uv)``.

    Parameters
    ----------
    G : graph-like
    vectors : (n, 3) unit vectors
    norms : array, optional
        Column norms for all ``n + m`` lifted elements.  Defaults to
        ``sqrt(deg/m)`` for vertices and ``sqrt(1/m)`` for edge-nodes.

    Returns
    -------
    AngleLikelihood
        ``value`` is ``inf`` when some edge has parallel endpoints; those
        edge ids are listed in ``flagged_edges``.
    """
    g = as_graph(G)
    X = as_vectors(g, vectors)
    m = g.n_edges
    if m == 0:
        raise DegenerateInstanceError("graph has no edges")
    deg = g.degrees()
    if norms is None:
        norms = np.concatenate([np.sqrt(np.array(deg, dtype=float) / m), np.full(m, math.sqrt(1.0 / m))])
    norms = np.asarray(norms, dtype=float)
    if norms.shape != (g.n + m,):
        raise ValidationError(f"norms must have length {g.n + m}")
    Q = np.zeros((3, g.n + m))
    Q[:, :g.n] = (X * norms[:g.n, None]).T
    flagged = []
    terms = []
    for t, (a, b) in enumerate(g.edges):
        z = np.cross(X[a], X[b])
        s2 = float(z @ z)
        if s2 <= 1e-300:
            flagged.append(t)
            z = _orthogonal_unit(X[a])
        else:
            terms.append(math.log(norms[a] ** 2 * norms[b] ** 2 * norms[g.n + t] ** 2 * s2))
            z = z / math.sqrt(s2)
        Q[:, g.n + t] = norms[g.n + t] * z
    value = math.inf if flagged else -math.fsum(terms) / m
    return AngleLikelihood(value, tuple(flagged), GramFactor(Q))


def kernel_likelihood_on_lift(G, factor: GramFactor) -> float:
    """``log_likelihood`` of a factor on the lifted dataset of ``G``."""
    return log_likelihood(factor, lift_to_hypergraph(G).dataset)
