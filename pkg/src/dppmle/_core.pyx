# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: batched small determinants and sphere scans."""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs
from libc.stdlib cimport malloc, free

cnp.import_array()


cdef double _abs_det_inplace(double* a, Py_ssize_t n) noexcept nogil:
    """|det| of a row-major n x n buffer by LU with partial pivoting."""
    cdef Py_ssize_t i, j, k, p
    cdef double best, v, piv, f, det = 1.0
    for k in range(n):
        p = k
        best = fabs(a[k * n + k])
        for i in range(k + 1, n):
            v = fabs(a[i * n + k])
            if v > best:
                best = v
                p = i
        if best == 0.0:
            return 0.0
        if p != k:
            for j in range(n):
                v = a[k * n + j]
                a[k * n + j] = a[p * n + j]
                a[p * n + j] = v
        piv = a[k * n + k]
        det *= piv
        for i in range(k + 1, n):
            f = a[i * n + k] / piv
            if f != 0.0:
                for j in range(k + 1, n):
                    a[i * n + j] -= f * a[k * n + j]
    return fabs(det)


def masked_abs_dets(K, masks):
    cdef const double[:, ::1] Kv = np.ascontiguousarray(K, dtype=np.float64)
    cdef const cnp.uint64_t[::1] mv = np.ascontiguousarray(masks, dtype=np.uint64)
    cdef Py_ssize_t n = Kv.shape[0], count = mv.shape[0]
    out = np.empty(count, dtype=np.float64)
    cdef double[::1] ov = out
    cdef Py_ssize_t t, i, j
    cdef cnp.uint64_t mask
    cdef double* buf = <double*> malloc(max(n * n, 1) * sizeof(double))
    if buf == NULL:
        raise MemoryError()
    try:
        with nogil:
            for t in range(count):
                mask = mv[t]
                for i in range(n):
                    for j in range(n):
                        buf[i * n + j] = Kv[i, j]
                    if not ((mask >> i) & 1):
                        buf[i * n + i] -= 1.0
                ov[t] = _abs_det_inplace(buf, n)
    finally:
        free(buf)
    return out


def bordered_abs_dets(E, Q, indptr, indices):
    cdef const double[:, ::1] Ev = np.ascontiguousarray(E, dtype=np.float64)
    cdef const double[:, ::1] Qv = np.ascontiguousarray(Q, dtype=np.float64)
    cdef const cnp.int64_t[::1] ip = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef const cnp.int64_t[::1] ix = np.ascontiguousarray(indices, dtype=np.int64)
    cdef Py_ssize_t r = Ev.shape[0], m = ip.shape[0] - 1
    out = np.zeros(m, dtype=np.float64)
    cdef double[::1] ov = out
    cdef Py_ssize_t t, s, w, i, j, c
    cdef double* buf = <double*> malloc(max(4 * r * r, 1) * sizeof(double))
    if buf == NULL:
        raise MemoryError()
    try:
        with nogil:
            for t in range(m):
                s = ip[t + 1] - ip[t]
                if s > r:
                    continue
                w = r + s
                for i in range(r):
                    for j in range(r):
                        buf[i * w + j] = Ev[i, j]
                    for j in range(s):
                        c = ix[ip[t] + j]
                        buf[i * w + r + j] = Qv[i, c]
                        buf[(r + j) * w + i] = Qv[i, c]
                for i in range(s):
                    for j in range(s):
                        buf[(r + i) * w + r + j] = 0.0
                ov[t] = _abs_det_inplace(buf, w) if w > 0 else 1.0
    finally:
        free(buf)
    return out


def sphere_min_sin2(points, neighbors):
    cdef const double[:, ::1] P = np.ascontiguousarray(points, dtype=np.float64)
    cdef const double[:, ::1] N = np.ascontiguousarray(neighbors, dtype=np.float64)
    cdef Py_ssize_t g = P.shape[0], k = N.shape[0], a, b
    out = np.empty(g, dtype=np.float64)
    cdef double[::1] ov = out
    cdef double best, c
    with nogil:
        for a in range(g):
            best = 0.0
            for b in range(k):
                c = P[a, 0] * N[b, 0] + P[a, 1] * N[b, 1] + P[a, 2] * N[b, 2]
                c = c * c
                if c > best:
                    best = c
            ov[a] = 1.0 - best
    return out
