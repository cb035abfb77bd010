"""Project a near-optimal kernel on a lifted graph dataset to dimension 3.

Steps: pick an anchor hyperedge ``S`` whose probability is closest to the
product of its diagonal entries, project every column onto ``V = span(q_S)``,
re-place the columns that are badly served by the projection (endpoints of
nearly-parallel edges, and columns with a large component outside ``V``)
with a sphere max-min search, then rescale so the spectrum fits in
``[0, 1]``.

The ground set is the lifted one: elements ``0..n-1`` are graph vertices,
element ``n + t`` is the node of edge ``t``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from dppmle.coloring.geometry import sphere_argmax
from dppmle.dataset import Dataset
from dppmle.diagonal import hadamard_lower_bound
from dppmle.errors import AnchorDegeneracyError, GuaranteeError, ParameterError, ValidationError
from dppmle.graph import as_graph
from dppmle.kernel import GramFactor, MarginalKernel, log_likelihood, sample_probabilities


_SIGMA_SLACK = 1e-12


@dataclass(frozen=True)
class ProjectionParams:
    """Knobs of :func:`project_to_rank3`.

    Attributes
    ----------
    delta : float or None
        Near-optimality slack; ``None`` means measure ``l(K) - l*`` from the input.
    eps0 : float
        Edges with ``sin^2`` below this are bad; must lie in ``(0, 1/8)``.
    k : int or None
        Degree bound of the graph; ``None`` uses the actual maximum degree.
    resolution_deg, refinements : sphere-search grid settings.
    mode : ``"report"`` or ``"guarantee"``
        Guarantee mode enforces ``delta <= 1/(128 k)^2`` and raises when a
        checked postcondition fails; report mode only records.
    """

    delta: Optional[float] = None
    eps0: float = 0.1
    k: Optional[int] = None
    resolution_deg: float = 2.0
    refinements: int = 3
    mode: str = "report"

    def __post_init__(self):
        if not 0.0 < self.eps0 < 0.125:
            raise ParameterError(f"eps0 must lie in (0, 1/8), got {self.eps0}")
        if self.delta is not None and self.delta < 0:
            raise ParameterError("delta must be nonnegative")
        if self.mode not in ("report", "guarantee"):
            raise ParameterError(f"mode must be 'report' or 'guarantee', got {self.mode!r}")


def _factor(KQ) -> GramFactor:
    if isinstance(KQ, GramFactor):
        return KQ
    return GramFactor.from_kernel(KQ if isinstance(KQ, MarginalKernel) else MarginalKernel(KQ))


def numerical_rank(Q: np.ndarray, rtol: float = 1e-10) -> int:
    s = np.linalg.svd(Q, compute_uv=False)
    return int(np.sum(s > rtol * max(s[0], 1e-300))) if s.size else 0


def find_anchor_triple(Q, D: Dataset) -> tuple[int, float]:
    """Sample index maximizing ``Pr[Y = X] / prod_{i in X} ||q_i||^2``.

    Returns ``(sample index, ratio)``; ties (to a relative 1e-12) go to the
    lowest index.

    Raises
    ------
    AnchorDegeneracyError
        Factor rank below 3, or every ratio is zero.
    ValidationError
        A sample is not of size 3.
    """
    F = _factor(Q)
    if numerical_rank(F.Q) < 3:
        raise AnchorDegeneracyError("anchor selection needs a factor of rank >= 3")
    if any(len(s) != 3 for s in D.samples):
        raise ValidationError("anchor selection needs samples of size 3")
    p = sample_probabilities(F, D.samples)
    n2 = F.norms ** 2
    denom = np.array([np.prod(n2[list(s)]) for s in D.samples])
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(denom > 0, p / np.where(denom > 0, denom, 1.0), 0.0)
    best = float(np.max(ratio))
    # ratios equal up to rounding count as ties
    i = int(np.nonzero(ratio >= best * (1.0 - 1e-12))[0][0])
    if ratio[i] <= 0:
        raise AnchorDegeneracyError("every sample has zero probability")
    return i, float(ratio[i])


def anchor_basis(Q, S) -> np.ndarray:
    """Orthonormal basis (r x 3) of the span of the three anchor columns."""
    F = _factor(Q)
    A = F.Q[:, list(S)]
    U, s, _ = np.linalg.svd(A, full_matrices=False)
    if s.size < 3 or s[2] <= 1e-12 * max(s[0], 1e-300):
        raise AnchorDegeneracyError("anchor columns span fewer than 3 dimensions")
    return U[:, :3]


def residuals(Q, V: np.ndarray) -> np.ndarray:
    """Squared norm of each column's component orthogonal to ``span(V)``."""
    F = _factor(Q)
    P = V.T @ F.Q
    r = F.norms ** 2 - np.sum(P * P, axis=0)
    return np.maximum(r, 0.0)


def residual_mass(Q, S) -> float:
    """``sum_{i not in S} ||proj_{V-perp} q_i||^2`` with ``V = span(q_S)``."""
    V = anchor_basis(Q, S)
    r = residuals(Q, V)
    mask = np.ones(r.shape[0], dtype=bool)
    mask[list(S)] = False
    return math.fsum(r[mask])


@dataclass(frozen=True)
class BadSets:
    edges: frozenset          # B_e (edge ids)
    endpoints: frozenset      # B_1 (vertex ids)
    off_span: frozenset       # B_2 (lifted element ids)
    edge_bound: float
    off_span_bound: float

    @property
    def all(self) -> frozenset:
        return self.endpoints | self.off_span

    def to_json(self) -> dict:
        return {"B_e": len(self.edges), "B_1": len(self.endpoints), "B_2": len(self.off_span),
                "B_e_bound": self.edge_bound, "B_2_bound": self.off_span_bound}


def sin2_between(x: np.ndarray, y: np.ndarray) -> float:
    nx, ny = float(x @ x), float(y @ y)
    if nx == 0.0 or ny == 0.0:
        return 0.0
    return max(0.0, 1.0 - float(x @ y) ** 2 / (nx * ny))


def classify_bad(Q, D: Dataset, graph, params: ProjectionParams, V: np.ndarray,
                 delta: float) -> BadSets:
    """Bad edges, their endpoints, and columns far outside ``span(V)``.

    A column is in ``B_2`` when its off-span residual is at least
    ``sqrt(delta)`` times its squared norm (and not just rounding noise).
    """
    F = _factor(Q)
    g = as_graph(graph)
    Be = frozenset(t for t, (a, b) in enumerate(g.edges)
                   if sin2_between(F.Q[:, a], F.Q[:, b]) < params.eps0)
    B1 = frozenset(x for t in Be for x in g.edges[t])
    r = residuals(F, V)
    n2 = F.norms ** 2
    thr = math.sqrt(max(delta, 0.0))
    B2 = frozenset(int(i) for i in np.nonzero((n2 > 0) & (r >= thr * n2) & (r > 1e-12 * n2))[0])
    m = g.n_edges
    return BadSets(Be, B1, B2, delta * m / math.log(8) + 1, math.sqrt(max(delta, 0.0)) * m)


@dataclass(frozen=True)
class Reassignment:
    factor: GramFactor
    tau_hat: float
    searches: tuple[float, ...]


def greedy_reassign(graph, Q, V: np.ndarray, B: BadSets,
                    params: ProjectionParams = ProjectionParams()) -> Reassignment:
    """Dimension-3 factor: good columns projected, bad ones re-placed.

    Bad vertices are visited in id order.  Each gets ``||q_v|| z`` where
    ``z`` maximizes the smallest ``sin^2`` to its already-placed neighbours
    (good vertices count as placed from the start).  A bad edge-node gets
    the direction orthogonal to both (re-placed) endpoints with its norm
    kept.  ``tau_hat`` is the smallest ``sin^2`` over edges touching a bad
    vertex.
    """
    F = _factor(Q)
    g = as_graph(graph)
    n = g.n
    P = V.T @ F.Q
    norms = F.norms
    bad_v = sorted(i for i in B.all if i < n)
    placed = np.ones(n, dtype=bool)
    placed[bad_v] = False
    adj = g.adjacency()
    searches = []
    for v in bad_v:
        nb = [P[:, u] for u in adj[v] if placed[u] and np.any(P[:, u])]
        res = sphere_argmax(np.array(nb).reshape(-1, 3), params.resolution_deg, params.refinements)
        if res.value <= 0.0 and len(nb) < 3:
            raise GuaranteeError("sphere search returned 0 with fewer than 3 neighbours")
        P[:, v] = norms[v] * res.direction
        placed[v] = True
        searches.append(res.value)
    for t, (a, b) in enumerate(g.edges):
        col = n + t
        if col not in B.all:
            continue
        z = np.cross(P[:, a], P[:, b])
        nz = np.linalg.norm(z)
        if nz <= 1e-300:
            base = P[:, a] if np.any(P[:, a]) else np.array([1.0, 0.0, 0.0])
            axis = np.eye(3)[int(np.argmin(np.abs(base)))]
            z = np.cross(base, axis)
            nz = np.linalg.norm(z)
        P[:, col] = norms[col] * z / nz
    badset = set(bad_v)
    touched = [sin2_between(P[:, a], P[:, b]) for a, b in g.edges if a in badset or b in badset]
    tau = min(touched) if touched else 1.0
    return Reassignment(GramFactor(P), tau, tuple(searches))


def rescale_and_assemble(Qp) -> tuple[MarginalKernel, float]:
    """``K' = beta Q'^T Q'`` with ``beta = min(1, 1/sigma_1(Q')^2)``.

    ``sigma_1`` within 1e-12 of 1 counts as 1, so rounding in the SVD of an
    exact colouring factor does not produce a spurious rescale.
    """
    F = Qp if isinstance(Qp, GramFactor) else GramFactor(Qp)
    s1 = F.spectral_norm()
    beta = 1.0 if s1 <= 1.0 + _SIGMA_SLACK else 1.0 / (s1 * s1)
    K = beta * (F.Q.T @ F.Q)
    return MarginalKernel((K + K.T) / 2.0), beta


@dataclass
class ProjectionReport:
    l_in: float
    l_out: float
    l_star: float
    delta_hat: float
    delta_used: float
    beta: float
    early_exit: bool
    anchor: Optional[int] = None
    anchor_ratio: Optional[float] = None
    residual_mass: Optional[float] = None
    bad_sets: dict = field(default_factory=dict)
    tau_hat: Optional[float] = None
    checks: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return dict(self.__dict__)


def _three_rows(Q: np.ndarray) -> np.ndarray:
    U, s, Vt = np.linalg.svd(Q, full_matrices=False)
    out = np.zeros((3, Q.shape[1]))
    r = min(3, s.size)
    out[:r] = s[:r, None] * Vt[:r]
    return out


def project_to_rank3(KQ, D: Dataset, graph, params: ProjectionParams = ProjectionParams()
                     ) -> tuple[MarginalKernel, GramFactor, ProjectionReport]:
    """Map a kernel on a lifted graph dataset to a dimension-3 kernel.

    Returns ``(K', factor of K', report)``.  The factor already includes the
    rescaling ``beta``.

    Raises
    ------
    GuaranteeError
        In guarantee mode, when ``delta > 1/(128 k)^2`` or a checked bound fails.
    """
    F = _factor(KQ)
    g = as_graph(graph)
    if D.n != g.n + g.n_edges or F.n != D.n:
        raise ValidationError(
            f"sizes disagree: factor n={F.n}, dataset n={D.n}, lifted graph n={g.n + g.n_edges}")
    l_in = log_likelihood(F, D)
    l_star = hadamard_lower_bound(D)
    delta_hat = l_in - l_star
    delta = params.delta if params.delta is not None else max(delta_hat, 0.0)
    k = params.k if params.k is not None else max(g.degrees(), default=1)
    guarantee = params.mode == "guarantee"
    if guarantee and delta > 1.0 / (128.0 * k) ** 2:
        raise GuaranteeError(f"delta = {delta:.3e} exceeds 1/(128k)^2 = {1 / (128 * k) ** 2:.3e}")
    checks: dict = {}

    if numerical_rank(F.Q) <= 3:
        Q3 = _three_rows(F.Q)
        K, beta = rescale_and_assemble(Q3)
        Fout = GramFactor(math.sqrt(beta) * Q3)
        l_out = log_likelihood(Fout, D)
        rep = ProjectionReport(l_in, l_out, l_star, delta_hat, delta, beta, True, checks=checks)
    else:
        anchor, ratio = find_anchor_triple(F, D)
        S = D.samples[anchor]
        V = anchor_basis(F, S)
        rmass = residual_mass(F, S)
        checks["residual_vs_anchor"] = rmass <= -math.log(ratio) + 1e-9
        checks["anchor_vs_delta"] = ratio >= math.exp(-delta_hat) * (1 - 1e-12)
        if guarantee and not checks["residual_vs_anchor"]:
            raise GuaranteeError(f"residual mass {rmass} exceeds -log(anchor ratio)")
        B = classify_bad(F, D, g, params, V, delta)
        re = greedy_reassign(g, F, V, B, params)
        K, beta = rescale_and_assemble(re.factor)
        Fout = GramFactor(math.sqrt(beta) * re.factor.Q)
        l_out = log_likelihood(Fout, D)
        rep = ProjectionReport(l_in, l_out, l_star, delta_hat, delta, beta, False, anchor, ratio,
                               rmass, B.to_json(), re.tau_hat, checks)
    checks["lower_bound"] = l_out >= l_star - 1e-9
    if guarantee and not checks["lower_bound"]:
        raise GuaranteeError(f"projected likelihood {l_out} below lower bound {l_star}")
    return K, Fout, rep
