"""Small-scale maximum-likelihood search over DPP kernels.

The kernel is parametrized as ``K = Q^T Q`` with ``Q`` of shape ``(r, n)``
and kept feasible by clipping the singular values of ``Q`` at 1 after every
step (the Euclidean projection onto the spectral-norm ball).  Descent uses
projected gradient steps with Armijo backtracking, from several random
starts.

Gradient: with ``A_t = K - I_{complement(X_t)}``,
``d l / d K = -(1/m) sum_t A_t^{-1}`` and ``d l / d Q = 2 Q (d l / d K)``.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from dppmle.dataset import Dataset, empirical_stats
from dppmle.errors import ParameterError, SizeGuardError
from dppmle.kernel import UNDERFLOW_FLOOR, GramFactor, MarginalKernel

MAX_N = 12
_PENALTY = -math.log(UNDERFLOW_FLOOR)


@dataclass(frozen=True)
class OptimizerConfig:
    rank: Optional[int] = None
    restarts: int = 20
    max_iters: int = 3000
    step: float = 1.0
    backtrack: float = 0.5
    tol: float = 1e-12
    seed: int = 0

    def __post_init__(self):
        if self.rank is not None and self.rank < 1:
            raise ParameterError("rank must be positive")
        if self.restarts < 1 or self.max_iters < 1:
            raise ParameterError("restarts and max_iters must be positive")
        if not (self.step > 0 and 0 < self.backtrack < 1):
            raise ParameterError("need step > 0 and 0 < backtrack < 1")
        if self.tol < 1e-12:
            raise ParameterError("tol must be >= 1e-12")


class _Problem:
    """Distinct samples with weights and the per-sample complement masks."""

    def __init__(self, D: Dataset):
        cnt = Counter(D.samples)
        self.n = D.n
        self.m = D.m
        self.samples = list(cnt)
        self.w = np.array([cnt[s] / D.m for s in self.samples])
        out = np.ones((len(self.samples), D.n))
        for t, s in enumerate(self.samples):
            out[t, list(s)] = 0.0
        self.outside = out

    def matrices(self, Q: np.ndarray) -> np.ndarray:
        K = Q.T @ Q
        A = np.broadcast_to(K, (len(self.samples), self.n, self.n)).copy()
        idx = np.arange(self.n)
        A[:, idx, idx] -= self.outside
        return A

    def objective(self, Q: np.ndarray, penalize: bool = True) -> float:
        sign, logdet = np.linalg.slogdet(self.matrices(Q))
        lp = np.where(sign == 0, -np.inf, logdet)
        if penalize:
            lp = np.maximum(lp, -_PENALTY)
        elif np.any(lp <= -_PENALTY):
            return math.inf
        return float(-np.dot(self.w, lp))

    def gradient(self, Q: np.ndarray) -> tuple[np.ndarray, list[int]]:
        A = self.matrices(Q)
        sign, logdet = np.linalg.slogdet(A)
        ok = (sign != 0) & (logdet > -_PENALTY)
        flags = [int(t) for t in np.nonzero(~ok)[0]]
        G = np.zeros((self.n, self.n))
        if np.any(ok):
            inv = np.linalg.inv(A[ok])
            G = -np.einsum("t,tij->ij", self.w[ok], inv)
        G = (G + G.T) / 2.0
        return 2.0 * Q @ G, flags


def clip_spectral(Q: np.ndarray) -> np.ndarray:
    """Project onto ``sigma_1(Q) <= 1`` by clipping singular values."""
    U, s, Vt = np.linalg.svd(Q, full_matrices=False)
    if s[0] <= 1.0:
        return Q
    return (U * np.minimum(s, 1.0)) @ Vt


def gradient(D: Dataset, Q) -> tuple[np.ndarray, list[int]]:
    """Analytic gradient of ``l(Q^T Q)`` with respect to ``Q``.

    Returns ``(grad, flags)``; ``flags`` lists indices of distinct samples
    (in first-appearance order) whose matrix is singular or below the
    underflow floor.  Those samples are left out of the gradient.
    """
    Q = Q.Q if isinstance(Q, GramFactor) else np.asarray(Q, dtype=float)
    return _Problem(D).gradient(Q)


def objective(D: Dataset, Q) -> float:
    """``l(Q^T Q)`` with zero-probability samples mapped to ``inf``."""
    Q = Q.Q if isinstance(Q, GramFactor) else np.asarray(Q, dtype=float)
    return _Problem(D).objective(Q, penalize=False)


def projected_gradient_norm(D: Dataset, Q, eta: float = 1e-3) -> float:
    """``||Q - clip(Q - eta g)|| / eta``; zero at constrained stationary points."""
    Q = Q.Q if isinstance(Q, GramFactor) else np.asarray(Q, dtype=float)
    g, _ = gradient(D, Q)
    return float(np.linalg.norm(Q - clip_spectral(Q - eta * g)) / eta)


@dataclass
class OptReport:
    best_ll: float
    best_kernel: Optional[MarginalKernel]
    best_factor: Optional[GramFactor]
    best_restart: int
    restart_lls: list[float]
    trajectories: list[list[float]]
    grad_norm: float
    diag_deviation: np.ndarray
    failed: bool = False
    iterations: list[int] = field(default_factory=list)

    def to_json(self) -> dict:
        return {"best_ll": self.best_ll, "best_restart": self.best_restart,
                "restart_lls": self.restart_lls, "grad_norm": self.grad_norm,
                "diag_deviation": self.diag_deviation.tolist(), "failed": self.failed,
                "iterations": self.iterations,
                "kernel": self.best_kernel.to_json() if self.best_kernel else None}


def _descend(P: _Problem, Q: np.ndarray, cfg: OptimizerConfig):
    f = P.objective(Q)
    traj = [f]
    eta = cfg.step
    it = 0
    for it in range(1, cfg.max_iters + 1):
        g, _ = P.gradient(Q)
        eta = min(eta * 2.0, 1e3)
        while True:
            Qn = clip_spectral(Q - eta * g)
            step = Q - Qn
            fn = P.objective(Qn)
            if fn <= f - 1e-4 * float(np.sum(g * step)) or eta < 1e-14:
                break
            eta *= cfg.backtrack
        if fn > f or eta < 1e-14:
            break
        dec = f - fn
        Q, f = Qn, fn
        traj.append(f)
        if dec <= cfg.tol * max(1.0, abs(f)):
            break
    return Q, f, traj, it


def optimize(D: Dataset, cfg: OptimizerConfig = OptimizerConfig()) -> OptReport:
    """Multi-start projected gradient descent on ``l``.

    Raises
    ------
    SizeGuardError
        ``n > 12``.
    """
    if D.n > MAX_N:
        raise SizeGuardError(f"optimizer limited to n <= {MAX_N}, got {D.n}")
    r = cfg.rank if cfg.rank is not None else D.n
    if r > D.n:
        raise ParameterError(f"rank {r} exceeds n = {D.n}")
    P = _Problem(D)
    seeds = np.random.SeedSequence(cfg.seed).spawn(cfg.restarts)
    lls, trajs, factors, iters = [], [], [], []
    bound = 1.0 / math.sqrt(D.n)
    for ss in seeds:
        rng = np.random.default_rng(ss)
        Q0 = clip_spectral(rng.uniform(-bound, bound, size=(r, D.n)))
        Q, f, traj, it = _descend(P, Q0, cfg)
        exact = P.objective(Q, penalize=False)
        lls.append(exact)
        trajs.append(traj)
        factors.append(Q)
        iters.append(it)
    best = min(range(len(lls)), key=lambda i: (lls[i], i))
    st = empirical_stats(D)
    freq = np.array(st.frequencies, dtype=float) / st.m
    if not math.isfinite(lls[best]):
        return OptReport(math.inf, None, None, best, lls, trajs, math.nan,
                         np.full(D.n, math.nan), failed=True, iterations=iters)
    Qb = factors[best]
    F = GramFactor(Qb)
    K = F.kernel()
    return OptReport(lls[best], K, F, best, lls, trajs, projected_gradient_norm(D, Qb),
                     np.diag(K.matrix) - freq, iterations=iters)


@dataclass(frozen=True)
class DiagonalTheoremReport:
    max_deviation: float
    deviations: tuple[float, ...]
    best_ll: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.max_deviation <= self.tol

    def to_json(self) -> dict:
        return {"max_deviation": self.max_deviation, "deviations": list(self.deviations),
                "best_ll": self.best_ll, "tol": self.tol, "passed": self.passed}


def verify_diagonal_theorem(D: Dataset, cfg: OptimizerConfig = OptimizerConfig(),
                            tol: float = 1e-2) -> DiagonalTheoremReport:
    """Compare the optimizer's best diagonal with the empirical frequencies."""
    if D.n > 8:
        raise SizeGuardError(f"diagonal check limited to n <= 8, got {D.n}")
    rep = optimize(D, cfg)
    dev = np.abs(rep.diag_deviation)
    return DiagonalTheoremReport(float(np.max(dev)), tuple(float(x) for x in rep.diag_deviation),
                                 rep.best_ll, tol)
