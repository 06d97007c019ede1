"""Compiled inner loops.

Every function here has a drop-in twin in ``_pykernels`` with the same
signature and semantics; ``ruzsa.kernels`` picks one at import time.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport log

cnp.import_array()


def cyclic_convolve_naive(const double[::1] p, const double[::1] q, moduli):
    """Direct O(N^2) convolution on Z_{m_1} x ... x Z_{m_k} (flat C order)."""
    cdef Py_ssize_t n = p.shape[0]
    cdef Py_ssize_t i, j, f, idx
    cdef long s
    cdef double pi
    cdef cnp.ndarray[cnp.int64_t, ndim=1] mods = np.asarray(moduli, dtype=np.int64)
    cdef Py_ssize_t k = mods.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.zeros(n, dtype=np.float64)
    cdef double[::1] o = out
    cdef cnp.int64_t[::1] m = mods
    cdef cnp.ndarray[cnp.int64_t, ndim=2] dig
    cdef cnp.int64_t[:, ::1] d
    cdef cnp.ndarray[cnp.int64_t, ndim=1] strides_arr
    cdef cnp.int64_t[::1] st
    cdef long m0

    if q.shape[0] != n:
        raise ValueError("operands must have equal length")
    if k == 1:
        m0 = m[0]
        for i in range(n):
            pi = p[i]
            if pi == 0.0:
                continue
            for j in range(n):
                idx = i + j
                if idx >= m0:
                    idx -= m0
                o[idx] += pi * q[j]
        return out

    strides_arr = np.ones(k, dtype=np.int64)
    for f in range(k - 2, -1, -1):
        strides_arr[f] = strides_arr[f + 1] * mods[f + 1]
    st = strides_arr
    dig = np.empty((n, k), dtype=np.int64)
    d = dig
    for i in range(n):
        for f in range(k):
            d[i, f] = (i // st[f]) % m[f]
    for i in range(n):
        pi = p[i]
        if pi == 0.0:
            continue
        for j in range(n):
            idx = 0
            for f in range(k):
                s = d[i, f] + d[j, f]
                if s >= m[f]:
                    s -= m[f]
                idx += s * st[f]
            o[idx] += pi * q[j]
    return out


def entropy_nats(const double[::1] p):
    """-sum p log p with 0 log 0 = 0."""
    cdef Py_ssize_t i
    cdef double acc = 0.0
    cdef double x
    for i in range(p.shape[0]):
        x = p[i]
        if x > 0.0:
            acc -= x * log(x)
    return acc


def pav_decreasing(const double[::1] y, const double[::1] w):
    """Weighted least-squares fit of a non-increasing sequence (PAV)."""
    cdef Py_ssize_t n = y.shape[0]
    cdef Py_ssize_t i, b, top = 0
    cdef cnp.ndarray[cnp.float64_t, ndim=1] val = np.empty(n, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] wt = np.empty(n, dtype=np.float64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] cnt = np.empty(n, dtype=np.int64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n, dtype=np.float64)
    cdef double[::1] v = val
    cdef double[::1] ww = wt
    cdef cnp.int64_t[::1] c = cnt
    cdef double[::1] o = out
    cdef double nw
    cdef Py_ssize_t pos = 0

    for i in range(n):
        v[top] = y[i]
        ww[top] = w[i]
        c[top] = 1
        top += 1
        while top > 1 and v[top - 2] < v[top - 1]:
            nw = ww[top - 2] + ww[top - 1]
            v[top - 2] = (ww[top - 2] * v[top - 2] + ww[top - 1] * v[top - 1]) / nw
            ww[top - 2] = nw
            c[top - 2] += c[top - 1]
            top -= 1
    for b in range(top):
        for i in range(c[b]):
            o[pos] = v[b]
            pos += 1
    return out
