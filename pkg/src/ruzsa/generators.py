"""Seeded random distributions, matrices and sets for ensembles and tests."""
from __future__ import annotations

import numpy as np

from .density import (
    FinitePMF,
    GridDensity,
    JointPMF,
    is_log_concave_sequence,
    markov_from_conditionals,
)
from .errors import ValidationError
from .groups import GroupSpec

# log-masses this far below the peak are set to zero (contiguous tails only)
LOG_FLOOR = -300.0


def random_pmf(g: GroupSpec, rng: np.random.Generator, concentration: float = 1.0,
               support_fraction: float | None = None) -> FinitePMF:
    """Dirichlet(concentration) pmf, optionally on a random sub-support."""
    n = g.order
    alpha = np.full(n, float(concentration))
    p = np.zeros(n)
    if support_fraction is None:
        p = rng.dirichlet(alpha)
    else:
        k = max(1, int(round(support_fraction * n)))
        idx = rng.choice(n, size=k, replace=False)
        p[idx] = rng.dirichlet(alpha[:k])
    return FinitePMF._raw(g, p)


def random_varied_pmf(g: GroupSpec, rng: np.random.Generator) -> FinitePMF:
    """Mix of dense, sparse, peaked and point-mass laws to probe equality cases."""
    u = rng.random()
    if u < 0.05:
        return FinitePMF.point_mass(g, g.element(int(rng.integers(g.order))))
    if u < 0.35:
        return random_pmf(g, rng, concentration=float(rng.choice([0.1, 0.3])))
    if u < 0.65:
        return random_pmf(g, rng, support_fraction=float(rng.uniform(0.05, 0.5)))
    return random_pmf(g, rng, concentration=float(rng.choice([1.0, 5.0])))


def concave_sequence(n: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    """Random concave sequence of length n with maximum 0."""
    slopes = np.sort(rng.normal(0.0, scale, size=n - 1))[::-1]
    phi = np.concatenate([[0.0], np.cumsum(slopes)])
    return phi - phi.max()


def masses_from_log(phi: np.ndarray) -> np.ndarray:
    phi = phi - phi.max()
    m = np.where(phi < LOG_FLOOR, 0.0, np.exp(np.maximum(phi, LOG_FLOOR)))
    return m / m.sum()


def random_logconcave_pmf(m: int, rng: np.random.Generator) -> FinitePMF:
    """Log-concave pmf on Z_m viewed as the interval {0, ..., m-1}."""
    if m < 3:
        raise ValidationError("need m >= 3")
    length = int(rng.integers(1, m + 1))
    start = int(rng.integers(0, m - length + 1))
    p = np.zeros(m)
    if length == 1:
        p[start] = 1.0
    else:
        p[start:start + length] = masses_from_log(concave_sequence(length, rng, float(rng.uniform(0.1, 3))))
    return FinitePMF._raw(GroupSpec.cyclic(m), p)


def concave_knots(knots: int, rng: np.random.Generator, spread: float | None = None) -> np.ndarray:
    """Random concave values at equally spaced knots (max 0)."""
    spread = float(rng.uniform(0.5, 25.0)) if spread is None else spread
    slopes = np.sort(rng.normal(0.0, 1.0, size=knots - 1))[::-1]
    slopes += rng.normal(0.0, 1.0)
    phi = np.concatenate([[0.0], np.cumsum(slopes)])
    rng_ = phi.max() - phi.min()
    if rng_ > 0:
        phi = phi * (spread / rng_)
    return phi - phi.max()


def logdensity_grid(knot_values: np.ndarray, cells_per_knot: int = 16,
                    lo: float = 0.0, hi: float = 1.0) -> GridDensity:
    """Grid whose cell masses follow a piecewise-linear log-density through the knots.

    Masses are exp(phi) at cell midpoints, so a concave phi gives a discretely
    log-concave mass sequence.
    """
    k = len(knot_values)
    cells = cells_per_knot * (k - 1)
    x_knots = np.linspace(0.0, 1.0, k)
    mids = (np.arange(cells) + 0.5) / cells
    phi = np.interp(mids, x_knots, knot_values)
    return GridDensity._raw((lo,), (hi,), masses_from_log(phi))


def random_logconcave_grid(rng: np.random.Generator, cells: int = 512, dim: int = 1,
                           knots: int | None = None) -> GridDensity:
    """Log-concave grid density (axis-wise for dim > 1: a product of 1-D factors)."""
    if cells < 3:
        raise ValidationError("need cells >= 3")
    factors = []
    for _ in range(dim):
        k = int(rng.integers(2, 9)) if knots is None else knots
        per = max(1, cells // (k - 1))
        g = logdensity_grid(concave_knots(k, rng), per)
        factors.append(g.masses)
    m = factors[0]
    for f in factors[1:]:
        m = np.multiply.outer(m, f)
    width = rng.uniform(0.5, 4.0, size=dim)
    lo = rng.uniform(-2.0, 2.0, size=dim)
    return GridDensity._raw(lo, lo + width, m)


def random_grid(rng: np.random.Generator, cells: int = 256) -> GridDensity:
    """Arbitrary (not necessarily log-concave) 1-D grid density."""
    m = rng.dirichlet(np.full(cells, float(rng.choice([0.2, 1.0, 5.0]))))
    lo = rng.uniform(-2.0, 2.0)
    return GridDensity._raw((lo,), (lo + rng.uniform(0.5, 4.0),), m)


def random_joint(groups, rng: np.random.Generator, concentration: float = 1.0) -> JointPMF:
    shape = tuple(g.order for g in groups)
    t = rng.dirichlet(np.full(int(np.prod(shape)), concentration)).reshape(shape)
    return JointPMF._raw(groups, t)


def random_markov_triple(gx: GroupSpec, gy: GroupSpec, rng: np.random.Generator,
                         symmetric: bool = False) -> JointPMF:
    """(X1, Y, X2) with X1, X2 conditionally independent given Y."""
    py = random_pmf(gy, rng, concentration=float(rng.choice([0.3, 1.0])))
    k1 = rng.dirichlet(np.full(gx.order, float(rng.choice([0.2, 1.0]))), size=gy.order).T
    k2 = k1 if symmetric else rng.dirichlet(np.full(gx.order, float(rng.choice([0.2, 1.0]))),
                                            size=gy.order).T
    return markov_from_conditionals(py, k1, k2, gx, gx)


def random_pd_matrix(n: int, rng: np.random.Generator, eps: float = 1e-3) -> np.ndarray:
    """Wishart-style M^T M + eps I with a random condition scale."""
    M = rng.normal(size=(n + int(rng.integers(0, 3)), n)) * rng.uniform(0.2, 3.0)
    K = M.T @ M + eps * np.eye(n)
    return 0.5 * (K + K.T)


def random_subset(g: GroupSpec, rng: np.random.Generator, max_size: int | None = None) -> frozenset:
    n = g.order
    k = int(rng.integers(1, (max_size or n) + 1))
    return frozenset(g.element(int(i)) for i in rng.choice(n, size=k, replace=False))


def sinkhorn_coupling(f: np.ndarray, rng: np.random.Generator, iters: int = 500,
                      tol: float = 1e-13) -> np.ndarray:
    """Random coupling matrix with both marginals equal to f."""
    n = f.size
    mode = rng.integers(3)
    if mode == 0:
        return np.diag(f)
    if mode == 1:
        return np.outer(f, f)
    K = rng.gamma(0.5, size=(n, n)) + 1e-12
    sup = f > 0
    K[~sup, :] = 0
    K[:, ~sup] = 0
    u = np.ones(n)
    for _ in range(iters):
        v = np.divide(f, K.T @ u, out=np.zeros(n), where=sup)
        u = np.divide(f, K @ v, out=np.zeros(n), where=sup)
        P = u[:, None] * K * v[None, :]
        if np.abs(P.sum(axis=0) - f).max() < tol:
            break
    w = float(rng.uniform())
    return w * P + (1 - w) * np.diag(f)


__all__ = [
    "random_pmf", "random_varied_pmf", "random_logconcave_pmf", "random_logconcave_grid",
    "random_grid", "random_joint", "random_markov_triple", "random_pd_matrix",
    "random_subset", "concave_knots", "logdensity_grid", "masses_from_log",
    "is_log_concave_sequence", "sinkhorn_coupling",
]
