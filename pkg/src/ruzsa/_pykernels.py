"""Pure-Python/numpy versions of the compiled kernels in ``_ckernels``."""
import numpy as np


def cyclic_convolve_naive(p, q, moduli):
    """Direct O(N^2) convolution on Z_{m_1} x ... x Z_{m_k} (flat C order)."""
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    n = p.shape[0]
    if q.shape[0] != n:
        raise ValueError("operands must have equal length")
    mods = np.asarray(moduli, dtype=np.int64)
    digits = np.stack(np.unravel_index(np.arange(n), tuple(mods)), axis=1)
    out = np.zeros(n)
    for i in np.flatnonzero(p):
        sums = (digits[i] + digits) % mods
        idx = np.ravel_multi_index(tuple(sums.T), tuple(mods))
        np.add.at(out, idx, p[i] * q)
    return out


def entropy_nats(p):
    """-sum p log p with 0 log 0 = 0."""
    p = np.asarray(p, dtype=np.float64)
    pos = p[p > 0]
    return float(-np.sum(pos * np.log(pos)))


def pav_decreasing(y, w):
    """Weighted least-squares fit of a non-increasing sequence (PAV)."""
    vals, wts, cnts = [], [], []
    for yi, wi in zip(np.asarray(y, float), np.asarray(w, float)):
        vals.append(yi)
        wts.append(wi)
        cnts.append(1)
        while len(vals) > 1 and vals[-2] < vals[-1]:
            nw = wts[-2] + wts[-1]
            vals[-2] = (wts[-2] * vals[-2] + wts[-1] * vals[-1]) / nw
            wts[-2] = nw
            cnts[-2] += cnts[-1]
            vals.pop()
            wts.pop()
            cnts.pop()
    return np.repeat(np.asarray(vals, dtype=np.float64), cnts)
