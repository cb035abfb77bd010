"""Pure-numpy implementations of the hot kernels.

These mirror :mod:`dppmle._core` one-for-one and are used whenever the
compiled extension is unavailable or ``DPPMLE_PURE=1`` is set.
"""
import numpy as np

_CHUNK = 4096


def masked_abs_dets(K, masks):
    """Return ``|det(K - I_{complement(mask)})|`` for every bitmask.

    Parameters
    ----------
    K : ndarray, shape (n, n)
    masks : ndarray of uint64
        Bit ``i`` set means element ``i`` belongs to the subset.
    """
    K = np.ascontiguousarray(K, dtype=np.float64)
    masks = np.ascontiguousarray(masks, dtype=np.uint64)
    n = K.shape[0]
    out = np.empty(masks.shape[0], dtype=np.float64)
    if n == 0:
        out[:] = 1.0
        return out
    bits = np.uint64(1) << np.arange(n, dtype=np.uint64)
    for start in range(0, masks.shape[0], _CHUNK):
        chunk = masks[start:start + _CHUNK]
        outside = (chunk[:, None] & bits[None, :]) == 0
        A = np.broadcast_to(K, (chunk.shape[0], n, n)).copy()
        idx = np.arange(n)
        A[:, idx, idx] -= outside
        out[start:start + chunk.shape[0]] = np.abs(np.linalg.det(A))
    return out


def bordered_abs_dets(E, Q, indptr, indices):
    """Point probabilities of a factored kernel ``K = Q^T Q``.

    For a sample ``X`` the value is ``|det [[E, Q_X], [Q_X^T, 0]]|`` with
    ``E = I_r - Q Q^T``; samples larger than ``r`` have probability zero.
    """
    E = np.ascontiguousarray(E, dtype=np.float64)
    Q = np.ascontiguousarray(Q, dtype=np.float64)
    indptr = np.asarray(indptr, dtype=np.int64)
    indices = np.asarray(indices, dtype=np.int64)
    r = E.shape[0]
    m = indptr.shape[0] - 1
    sizes = np.diff(indptr)
    out = np.zeros(m, dtype=np.float64)
    for s in np.unique(sizes):
        s = int(s)
        rows = np.nonzero(sizes == s)[0]
        if s > r:
            continue
        if s == 0:
            out[rows] = abs(np.linalg.det(E)) if r else 1.0
            continue
        cols = indices[indptr[rows][:, None] + np.arange(s)[None, :]]
        M = np.zeros((rows.shape[0], r + s, r + s))
        M[:, :r, :r] = E
        QX = Q[:, cols].transpose(1, 0, 2)
        M[:, :r, r:] = QX
        M[:, r:, :r] = QX.transpose(0, 2, 1)
        out[rows] = np.abs(np.linalg.det(M))
    return out


def sphere_min_sin2(points, neighbors):
    """For each unit ``points[g]`` the minimum of ``1 - <p, n_j>^2`` over
    unit ``neighbors``; 1.0 when there are no neighbors."""
    points = np.asarray(points, dtype=np.float64)
    neighbors = np.asarray(neighbors, dtype=np.float64)
    if neighbors.shape[0] == 0:
        return np.ones(points.shape[0])
    c = points @ neighbors.T
    return 1.0 - np.max(c * c, axis=1)
