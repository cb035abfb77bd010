"""The diagonal-kernel approximation algorithm and its certificates.

All likelihoods here are per-sample averages (divided by ``m``), matching
:func:`dppmle.kernel.log_likelihood`.  ``0 log 0`` is taken as 0.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from dppmle.dataset import Dataset, empirical_stats
from dppmle.errors import DegenerateInstanceError, DomainError
from dppmle.kernel import MarginalKernel


def _xlogx(a: int, m: int) -> float:
    """``a * log(a / m)`` with the ``0 log 0 = 0`` convention."""
    return 0.0 if a == 0 else a * math.log(a / m)


def diagonal_kernel(D: Dataset) -> MarginalKernel:
    """``K = diag(a_i / m)``, each entry rounded once from the exact ratio."""
    st = empirical_stats(D)
    return MarginalKernel(np.diag([a / st.m for a in st.frequencies]))


def diag_log_likelihood(D: Dataset) -> float:
    """Closed-form likelihood of :func:`diagonal_kernel`.

    ``-(1/m) sum_i [a_i log(a_i/m) + (m - a_i) log(1 - a_i/m)]``
    """
    st = empirical_stats(D)
    m = st.m
    terms = [_xlogx(a, m) + _xlogx(m - a, m) for a in st.frequencies]
    return -math.fsum(terms) / m


def hadamard_lower_bound(D: Dataset) -> float:
    """Lower bound on the optimal likelihood from frequencies alone.

    Every sample probability is at most ``det(K_X) <= prod_{i in X} K_ii``;
    optimizing the diagonal freely gives ``-(1/m) sum_i a_i log(a_i/m)``.
    """
    st = empirical_stats(D)
    return -math.fsum(_xlogx(a, st.m) for a in st.frequencies) / st.m


def ratio_function_f(x: float) -> float:
    """``f(x) = (1 - x) log(1 - x) / (x log x)`` on the open unit interval."""
    x = float(x)
    if not 0.0 < x < 1.0:
        raise DomainError(f"f is defined on (0, 1), got {x!r}")
    return (1.0 - x) * math.log1p(-x) / (x * math.log(x))


def factor_full_elements(D: Dataset) -> tuple[Dataset, list[int]]:
    """Strip elements present in every sample.

    Such elements get probability 1 in the optimum and contribute nothing to
    any of the likelihoods, so they can be removed before certifying.  The
    residual keeps the same ground-set size; factored elements simply stop
    appearing.  Returns ``(residual, factored)`` with 0-based indices.
    """
    full = list(empirical_stats(D).full_frequency)
    if not full:
        return D, []
    drop = set(full)
    residual = Dataset(D.n, tuple(tuple(i for i in s if i not in drop) for s in D.samples))
    return residual, full


@dataclass(frozen=True)
class ApproxCertificate:
    l_diag: float
    l_lb: float
    ratio_bound_conditional: float
    ratio_bound_unconditional: float
    achieved_ratio: float
    a_max: int
    m: int
    factored: tuple[int, ...]

    def holds(self, slack: float = 1e-9) -> bool:
        return (self.l_lb <= self.l_diag + slack
                and self.achieved_ratio <= self.ratio_bound_conditional + slack)

    def to_json(self) -> dict:
        d = asdict(self)
        d["factored"] = [i + 1 for i in self.factored]
        return d


def certificate(D: Dataset) -> ApproxCertificate:
    """Approximation certificate for the diagonal kernel on ``D``.

    Full-frequency elements are factored out first.  When nothing is left to
    learn (``l_LB = 0``) the diagonal kernel is exact and the ratio is 1.

    Raises
    ------
    DegenerateInstanceError
        If ``m = 1`` (the unconditional bound divides by ``m - 1``).
    """
    if D.m == 1:
        raise DegenerateInstanceError("certificate needs m >= 2 samples")
    residual, factored = factor_full_elements(D)
    st = empirical_stats(residual)
    m = st.m
    l_diag = diag_log_likelihood(residual)
    l_lb = hadamard_lower_bound(residual)
    if l_lb > 0.0:
        achieved = l_diag / l_lb
    else:
        achieved = 1.0
    cond = 1.0 + ratio_function_f(st.a_max / m) if st.a_max > 0 else 1.0
    uncond = 1.0 + (1.0 + 1.0 / (m - 1)) * math.log(m)
    return ApproxCertificate(
        l_diag=l_diag, l_lb=l_lb, ratio_bound_conditional=cond,
        ratio_bound_unconditional=uncond, achieved_ratio=achieved,
        a_max=st.a_max, m=m, factored=tuple(factored))
