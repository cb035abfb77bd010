"""Kernel types, validation, exact DPP probabilities and log-likelihood.

Conventions
-----------
Element indices are 0-based everywhere inside the library.  A subset is any
iterable of distinct integers in ``range(n)``.  ``Pr[Y = X]`` is evaluated as
``|det(K - I_Xc)|`` where ``I_Xc`` is the 0/1 diagonal indicator of the
complement of ``X``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from dppmle import _accel
from dppmle.errors import (NotLEnsembleError, SizeGuardError,
                           StructuralInputError)

#: Default tolerance for spectrum/symmetry validation.
VALIDATION_TOL = 1e-9
#: Default tolerance for algebraic identities (normalization, round trips).
IDENTITY_TOL = 1e-8
#: Probabilities at or below this value make the log-likelihood infinite.
UNDERFLOW_FLOOR = 1e-300
#: Hard cap on ``n`` for exhaustive enumeration.
MAX_ENUMERATE_N = 20
#: Largest ground set handled by the bitmask path.
_MASK_LIMIT = 63


def _as_square(matrix, what="matrix") -> np.ndarray:
    arr = np.array(matrix, dtype=np.float64, copy=True)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise StructuralInputError(f"{what} must be square, got shape {arr.shape}")
    if arr.shape[0] < 1:
        raise StructuralInputError(f"{what} must be at least 1x1")
    if not np.all(np.isfinite(arr)):
        raise StructuralInputError(f"{what} has non-finite entries")
    return arr


class MarginalKernel:
    """Dense symmetric marginal kernel ``K`` of a DPP.

    The matrix is copied and frozen on construction.  Construction only checks
    structure (square, finite); call :func:`validate_kernel` for the spectral
    checks.
    """

    __slots__ = ("_matrix",)

    def __init__(self, matrix):
        arr = _as_square(matrix, "kernel")
        arr.setflags(write=False)
        self._matrix = arr

    @property
    def matrix(self) -> np.ndarray:
        return self._matrix

    @property
    def n(self) -> int:
        return self._matrix.shape[0]

    def __repr__(self):
        return f"MarginalKernel(n={self.n})"

    def to_json(self) -> dict:
        return {"n": self.n, "matrix": self._matrix.tolist()}

    @classmethod
    def from_json(cls, obj) -> "MarginalKernel":
        try:
            n = int(obj["n"])
            mat = obj["matrix"]
        except (KeyError, TypeError, ValueError) as exc:
            raise StructuralInputError(f"kernel object missing field: {exc}") from None
        K = cls(mat)
        if K.n != n:
            raise StructuralInputError(f"kernel declares n={n} but matrix is {K.n}x{K.n}")
        return K


class GramFactor:
    """Column factorization ``K = Q^T Q`` with ``Q`` of shape ``(r, n)``.

    Column ``i`` is the embedding vector ``q_i`` of element ``i``.
    """

    __slots__ = ("_Q",)

    def __init__(self, Q):
        arr = np.array(Q, dtype=np.float64, copy=True)
        if arr.ndim != 2:
            raise StructuralInputError(f"factor must be 2-D (r x n), got shape {arr.shape}")
        r, n = arr.shape
        if r < 1 or n < 1:
            raise StructuralInputError("factor needs rank >= 1 and n >= 1")
        if not np.all(np.isfinite(arr)):
            raise StructuralInputError("factor has non-finite entries")
        arr.setflags(write=False)
        self._Q = arr

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence[float]]) -> "GramFactor":
        cols = np.asarray(columns, dtype=np.float64)
        if cols.ndim != 2:
            raise StructuralInputError("columns must be a list of equal-length vectors")
        return cls(cols.T)

    @classmethod
    def from_kernel(cls, K, tol: float = 1e-12) -> "GramFactor":
        """Eigen-factor a PSD kernel, dropping eigenvalues below ``tol``.

        Returns ``Q = diag(sqrt(lam)) V^T`` so that ``E = I - Q Q^T`` is
        diagonal.  A rank-0 kernel yields a single zero row.
        """
        M = _matrix_of(K)
        lam, V = np.linalg.eigh(M)
        keep = lam > tol * max(1.0, float(np.max(np.abs(lam))))
        if not np.any(keep):
            return cls(np.zeros((1, M.shape[0])))
        lam = lam[keep][::-1]
        V = V[:, keep][:, ::-1]
        return cls(np.sqrt(lam)[:, None] * V.T)

    @property
    def Q(self) -> np.ndarray:
        return self._Q

    @property
    def n(self) -> int:
        return self._Q.shape[1]

    @property
    def rank(self) -> int:
        return self._Q.shape[0]

    @property
    def norms(self) -> np.ndarray:
        return np.linalg.norm(self._Q, axis=0)

    @property
    def directions(self) -> np.ndarray:
        """Unit columns ``q_i / ||q_i||`` (zero columns stay zero)."""
        nrm = self.norms
        safe = np.where(nrm > 0, nrm, 1.0)
        return self._Q / safe

    def spectral_norm(self) -> float:
        return float(np.linalg.norm(self._Q, 2))

    def kernel_ready(self, tol: float = VALIDATION_TOL) -> bool:
        return self.spectral_norm() <= 1.0 + tol

    def kernel(self) -> MarginalKernel:
        return factor_to_kernel(self)[0]

    def __repr__(self):
        return f"GramFactor(n={self.n}, rank={self.rank})"

    def to_json(self) -> dict:
        return {"n": self.n, "rank": self.rank, "columns": self._Q.T.tolist()}

    @classmethod
    def from_json(cls, obj) -> "GramFactor":
        try:
            n, r, cols = int(obj["n"]), int(obj["rank"]), obj["columns"]
        except (KeyError, TypeError, ValueError) as exc:
            raise StructuralInputError(f"factor object missing field: {exc}") from None
        F = cls.from_columns(cols)
        if F.n != n or F.rank != r:
            raise StructuralInputError(
                f"factor declares n={n}, rank={r} but columns give n={F.n}, rank={F.rank}")
        return F


class EnsembleKernel:
    """Positive semidefinite ``L`` with ``Pr[Y = X] = det(L_X) / det(I + L)``."""

    __slots__ = ("_matrix",)

    def __init__(self, matrix):
        arr = _as_square(matrix, "ensemble kernel")
        arr.setflags(write=False)
        self._matrix = arr

    @property
    def matrix(self) -> np.ndarray:
        return self._matrix

    @property
    def n(self) -> int:
        return self._matrix.shape[0]

    def probability(self, X: Iterable[int]) -> float:
        idx = _subset_index(X, self.n)
        num = np.linalg.det(self._matrix[np.ix_(idx, idx)]) if idx.size else 1.0
        return float(num / np.linalg.det(np.eye(self.n) + self._matrix))


def _matrix_of(K) -> np.ndarray:
    if isinstance(K, MarginalKernel):
        return K.matrix
    if isinstance(K, GramFactor):
        return factor_to_kernel(K)[0].matrix
    return MarginalKernel(K).matrix


def _subset_index(S: Iterable[int], n: int) -> np.ndarray:
    idx = []
    for s in S:
        if isinstance(s, (bool, np.bool_)) or not isinstance(s, (int, np.integer)):
            raise StructuralInputError(f"subset element {s!r} is not an integer")
        s = int(s)
        if not 0 <= s < n:
            raise StructuralInputError(f"element {s} out of range [0, {n})")
        idx.append(s)
    if len(set(idx)) != len(idx):
        raise StructuralInputError("subset has repeated elements")
    return np.array(sorted(idx), dtype=np.int64)


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of :func:`validate_kernel`."""

    n: int
    tol: float
    symmetry_defect: float
    min_eigenvalue: float
    max_eigenvalue: float
    eigenvalues: tuple[float, ...]
    diagonal_ok: bool
    passed: bool
    reasons: tuple[str, ...] = field(default=())

    def to_json(self) -> dict:
        return {
            "n": self.n, "tol": self.tol, "passed": self.passed,
            "symmetry_defect": self.symmetry_defect,
            "min_eigenvalue": self.min_eigenvalue,
            "max_eigenvalue": self.max_eigenvalue,
            "diagonal_ok": self.diagonal_ok,
            "reasons": list(self.reasons),
        }


def validate_kernel(K, tol: float = VALIDATION_TOL) -> ValidationReport:
    """Check symmetry, the ``[0, 1]`` diagonal and the ``[0, 1]`` spectrum.

    Nothing is clamped or modified; the report just states what was found.

    Parameters
    ----------
    K : MarginalKernel or array_like
    tol : float
        Eigenvalues in ``[-tol, 1 + tol]`` are accepted.  Any nonzero
        asymmetry fails (stored kernels must be exactly symmetric).

    Raises
    ------
    StructuralInputError
        Non-square or non-finite input.
    """
    M = K.matrix if isinstance(K, MarginalKernel) else _as_square(K, "kernel")
    n = M.shape[0]
    sym = float(np.max(np.abs(M - M.T)))
    lam = np.linalg.eigvalsh((M + M.T) / 2.0)
    d = np.diag(M)
    diag_ok = bool(np.all(d >= -tol) and np.all(d <= 1.0 + tol))
    reasons = []
    if sym != 0.0:
        reasons.append(f"asymmetric: max |K[i,j]-K[j,i]| = {sym!r}")
    if not diag_ok:
        reasons.append("diagonal entry outside [0, 1]")
    if lam[0] < -tol:
        reasons.append(f"min eigenvalue {float(lam[0])!r} < 0")
    if lam[-1] > 1.0 + tol:
        reasons.append(f"max eigenvalue {float(lam[-1])!r} > 1")
    return ValidationReport(
        n=n, tol=tol, symmetry_defect=sym,
        min_eigenvalue=float(lam[0]), max_eigenvalue=float(lam[-1]),
        eigenvalues=tuple(float(x) for x in lam), diagonal_ok=diag_ok,
        passed=not reasons, reasons=tuple(reasons))


def subset_marginal(K, S: Iterable[int]) -> float:
    """``Pr[S subset of Y] = det(K_S)``; the empty set gives 1."""
    M = _matrix_of(K)
    idx = _subset_index(S, M.shape[0])
    if idx.size == 0:
        return 1.0
    return float(np.linalg.det(M[np.ix_(idx, idx)]))


def point_probability(K, X: Iterable[int]) -> float:
    """``Pr[Y = X] = |det(K - I_Xc)|``.

    Accepts a :class:`MarginalKernel`, a :class:`GramFactor` (evaluated
    through the low-rank bordered determinant) or a raw array.
    """
    if isinstance(K, GramFactor):
        idx = _subset_index(X, K.n)
        return float(factor_probabilities(K, [tuple(idx)])[0])
    M = _matrix_of(K)
    n = M.shape[0]
    idx = _subset_index(X, n)
    A = M.copy()
    outside = np.ones(n, dtype=bool)
    outside[idx] = False
    A[outside, outside] -= 1.0
    return float(abs(np.linalg.det(A)))


def _csr(samples: Sequence[Sequence[int]]):
    sizes = np.fromiter((len(s) for s in samples), dtype=np.int64, count=len(samples))
    indptr = np.zeros(len(samples) + 1, dtype=np.int64)
    np.cumsum(sizes, out=indptr[1:])
    indices = np.fromiter((i for s in samples for i in s), dtype=np.int64,
                          count=int(indptr[-1]))
    return indptr, indices


def factor_probabilities(F: GramFactor, samples: Sequence[Sequence[int]]) -> np.ndarray:
    """Point probabilities of ``K = Q^T Q`` for many samples at once.

    Uses ``Pr[Y = X] = |det [[I - Q Q^T, Q_X], [Q_X^T, 0]]|``, which costs
    ``O((r + |X|)^3)`` per sample instead of ``O(n^3)``.
    """
    Q = F.Q
    E = np.eye(Q.shape[0]) - Q @ Q.T
    E = (E + E.T) / 2.0
    indptr, indices = _csr(samples)
    if indices.size and (indices.min() < 0 or indices.max() >= F.n):
        raise StructuralInputError(f"sample element out of range [0, {F.n})")
    return _accel.bordered_abs_dets(E, Q, indptr, indices)


def _masks(samples: Sequence[Sequence[int]], n: int) -> np.ndarray:
    out = np.zeros(len(samples), dtype=np.uint64)
    for t, s in enumerate(samples):
        v = 0
        for i in s:
            if not 0 <= i < n:
                raise StructuralInputError(
                    f"sample {t}: element {i} out of range [0, {n})")
            v |= 1 << int(i)
        out[t] = v
    return out


def sample_probabilities(K, samples: Sequence[Sequence[int]]) -> np.ndarray:
    """``Pr[Y = X_t]`` for each sample, choosing the cheapest exact path."""
    if isinstance(K, GramFactor):
        return factor_probabilities(K, samples)
    M = _matrix_of(K)
    n = M.shape[0]
    if n <= _MASK_LIMIT:
        return _accel.masked_abs_dets(M, _masks(samples, n))
    return factor_probabilities(GramFactor.from_kernel(M, tol=1e-15), samples)


def _samples_of(D):
    samples = getattr(D, "samples", None)
    n = getattr(D, "n", None)
    if samples is None:
        samples = [tuple(s) for s in D]
    return n, samples


def log_likelihood(K, D, floor: float = UNDERFLOW_FLOOR) -> float:
    """Average negative log-probability of the samples of ``D``.

    ``l(K) = -(1/m) sum_t log Pr[Y = X_t]``, which equals the
    multiplicity-weighted ``sum_X D(X) (-log Pr[Y = X])``.  Returns ``inf``
    when any sample probability is at or below ``floor``.

    Parameters
    ----------
    K : MarginalKernel, GramFactor or array_like
    D : Dataset
    """
    n, samples = _samples_of(D)
    kn = K.n if isinstance(K, (MarginalKernel, GramFactor)) else _matrix_of(K).shape[0]
    if n is not None and n != kn:
        raise StructuralInputError(f"dataset ground set {n} != kernel size {kn}")
    if not samples:
        raise StructuralInputError("dataset has no samples")
    p = sample_probabilities(K, samples)
    if np.any(p <= floor):
        return math.inf
    return math.fsum(-np.log(p)) / len(samples)


def enumerate_distribution(K) -> np.ndarray:
    """All ``2^n`` point probabilities, indexed by bitmask.

    Entry ``mask`` holds ``Pr[Y = {i : bit i of mask set}]``.  Use
    :func:`subsets_of` to turn masks into tuples.

    Raises
    ------
    SizeGuardError
        If ``n > 20``.
    """
    M = _matrix_of(K)
    n = M.shape[0]
    if n > MAX_ENUMERATE_N:
        raise SizeGuardError(f"enumeration limited to n <= {MAX_ENUMERATE_N}, got {n}")
    masks = np.arange(1 << n, dtype=np.uint64)
    return _accel.masked_abs_dets(M, masks)


def subsets_of(mask: int) -> tuple[int, ...]:
    out, i = [], 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


def to_l_ensemble(K, tol: float = VALIDATION_TOL) -> EnsembleKernel:
    """``L = K (I - K)^{-1}`` computed in the eigenbasis of ``K``.

    Raises
    ------
    NotLEnsembleError
        If the largest eigenvalue is ``>= 1 - tol``.
    """
    M = _matrix_of(K)
    lam, V = np.linalg.eigh((M + M.T) / 2.0)
    if lam[-1] >= 1.0 - tol:
        raise NotLEnsembleError(float(lam[-1]))
    lam = np.clip(lam, 0.0, None)
    L = (V * (lam / (1.0 - lam))) @ V.T
    return EnsembleKernel((L + L.T) / 2.0)


def from_l_ensemble(L) -> MarginalKernel:
    """``K = L (I + L)^{-1}``; ``L`` must be PSD (eigenvalues >= -tol)."""
    M = L.matrix if isinstance(L, EnsembleKernel) else _as_square(L, "ensemble kernel")
    lam, V = np.linalg.eigh((M + M.T) / 2.0)
    if lam[0] < -VALIDATION_TOL:
        raise StructuralInputError(f"ensemble kernel has negative eigenvalue {lam[0]!r}")
    lam = np.clip(lam, 0.0, None)
    K = (V * (lam / (1.0 + lam))) @ V.T
    return MarginalKernel((K + K.T) / 2.0)


def factor_to_kernel(F, clamp: bool = False) -> tuple[MarginalKernel, float]:
    """Assemble ``K = s * Q^T Q`` and return ``(K, s)``.

    ``s`` is 1 unless ``clamp`` is set and ``sigma_1(Q) > 1``, in which case
    ``s = 1 / sigma_1(Q)^2`` so that the spectrum lands in ``[0, 1]``.
    """
    if not isinstance(F, GramFactor):
        F = GramFactor(F)
    scale = 1.0
    if clamp:
        s1 = F.spectral_norm()
        if s1 > 1.0:
            scale = 1.0 / (s1 * s1)
    Q = F.Q
    K = scale * (Q.T @ Q)
    return MarginalKernel((K + K.T) / 2.0), scale
