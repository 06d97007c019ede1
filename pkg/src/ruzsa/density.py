"""Distribution representations.

``FinitePMF``         mass function on a finite product of cyclic groups.
``GridDensity``       piecewise-constant density on a box in R^n.
``ParametricDensity`` closed-form families (Gaussian, exponential, ...).
``JointPMF``          joint law of several finite-group variables.
``CircleDensity``     piecewise-constant density of an angle.
``PositiveDensity``   a (0, inf)-valued variable, stored through log X.
``ComplexDensity``    a C^x-valued variable, stored through (log|Z|, arg Z).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import special, stats

from .errors import (
    DegenerateDistributionError,
    GroupMismatchError,
    NormalizationError,
    ValidationError,
)
from .groups import TWO_PI, GroupSpec, IntegerMatrix, is_unimodular

FINITE_SUM_TOL = 1e-12
GRID_SUM_TOL = 1e-10
DEFAULT_CELLS = 4096
LOG_CONCAVE_TOL = 1e-9  # slack on second differences of log-masses (rounding in far tails)
DEFAULT_TAIL_MASS = 1e-9


def _as_prob_array(values, tol: float, what: str) -> np.ndarray:
    arr = np.array(values, dtype=np.float64)
    if arr.size == 0:
        raise ValidationError(f"{what}: no entries")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{what}: non-finite entry")
    if np.any(arr < 0):
        raise ValidationError(f"{what}: negative mass {arr.min():.3g}")
    total = arr.sum()
    if abs(total - 1.0) > tol:
        raise NormalizationError(f"{what}: masses sum to {float(total)!r}, not 1")
    arr.setflags(write=False)
    return arr


# ---------------------------------------------------------------------------
# finite groups
# ---------------------------------------------------------------------------

class FinitePMF:
    """Probability mass function on a finite group, indexed by flat element index."""

    __slots__ = ("group", "probs")

    def __init__(self, group: GroupSpec, probs, *, tol: float = FINITE_SUM_TOL):
        if not isinstance(group, GroupSpec) or not group.is_finite:
            raise GroupMismatchError("FinitePMF needs a finite GroupSpec")
        arr = _as_prob_array(np.ravel(probs), tol, "FinitePMF")
        if arr.size != group.order:
            raise ValidationError(f"{arr.size} masses for a group of order {group.order}")
        self.group = group
        self.probs = arr

    @classmethod
    def _raw(cls, group: GroupSpec, probs: np.ndarray) -> "FinitePMF":
        """Wrap an already-valid array, clipping round-off and renormalizing."""
        arr = np.clip(np.asarray(probs, dtype=np.float64).ravel(), 0.0, None)
        arr = arr / arr.sum()
        obj = cls.__new__(cls)
        arr.setflags(write=False)
        obj.group, obj.probs = group, arr
        return obj

    @classmethod
    def uniform(cls, group: GroupSpec) -> "FinitePMF":
        return cls(group, np.full(group.order, 1.0 / group.order))

    @classmethod
    def point_mass(cls, group: GroupSpec, x=0) -> "FinitePMF":
        p = np.zeros(group.order)
        p[group.index(x)] = 1.0
        return cls(group, p)

    @classmethod
    def uniform_on(cls, group: GroupSpec, support) -> "FinitePMF":
        idx = sorted({group.index(x) for x in support})
        if not idx:
            raise ValidationError("empty support")
        p = np.zeros(group.order)
        p[idx] = 1.0 / len(idx)
        return cls(group, p)

    @classmethod
    def from_dict(cls, group: GroupSpec, masses: dict) -> "FinitePMF":
        p = np.zeros(group.order)
        for x, v in masses.items():
            p[group.index(x)] += v
        return cls(group, p)

    def __len__(self):
        return self.probs.size

    def __repr__(self):
        return f"FinitePMF(Z{self.group.moduli}, {np.array2string(self.probs, precision=4)})"

    def __eq__(self, other):
        return (isinstance(other, FinitePMF) and self.group == other.group
                and np.array_equal(self.probs, other.probs))

    __hash__ = None

    def prob(self, x) -> float:
        return float(self.probs[self.group.index(x)])

    def support(self) -> list:
        return [self.group.element(int(i)) for i in np.flatnonzero(self.probs)]

    @property
    def is_point_mass(self) -> bool:
        return int(np.count_nonzero(self.probs)) == 1

    def pushforward(self, index_map: np.ndarray, group: GroupSpec | None = None) -> "FinitePMF":
        group = group or self.group
        out = np.bincount(index_map, weights=self.probs, minlength=group.order)
        return FinitePMF._raw(group, out)

    def scaled(self, a: int) -> "FinitePMF":
        """Law of aX (scalar_mul pushforward)."""
        if int(a) != a:
            raise ValidationError("finite-group scalars must be integers")
        g = self.group
        return self.pushforward(g.combine_indices([(int(a), np.arange(g.order))]))

    def negated(self) -> "FinitePMF":
        return self.pushforward(self.group.neg_index)

    def shifted(self, x) -> "FinitePMF":
        g = self.group
        idx = g.combine_indices([(1, np.arange(g.order)), (1, np.full(g.order, g.index(x)))])
        return self.pushforward(idx)

    def transform(self, A: IntegerMatrix, base: GroupSpec) -> "FinitePMF":
        """Law of AX when self lives on base^n and A is n x n."""
        n = A.rows
        if self.group != base.power(n) or not A.is_square:
            raise GroupMismatchError(f"pmf on {self.group} is not on {base}^{n}")
        joint = JointPMF((base,) * n, self.probs.reshape((base.order,) * n))
        return joint.linear_pushforward(A).flatten()


# ---------------------------------------------------------------------------
# joints over finite groups
# ---------------------------------------------------------------------------

class JointPMF:
    """Joint law of (X_0, ..., X_{k-1}); axis i of ``tensor`` indexes X_i."""

    __slots__ = ("groups", "tensor")

    def __init__(self, groups: Sequence[GroupSpec], tensor, *, tol: float = FINITE_SUM_TOL):
        groups = tuple(groups)
        if not groups:
            raise ValidationError("JointPMF needs at least one variable")
        for g in groups:
            if not isinstance(g, GroupSpec) or not g.is_finite:
                raise GroupMismatchError("JointPMF variables must live on finite groups")
        t = np.array(tensor, dtype=np.float64)
        shape = tuple(g.order for g in groups)
        if t.shape != shape:
            if t.size != math.prod(shape):
                raise ValidationError(f"tensor shape {t.shape} does not match {shape}")
            t = t.reshape(shape)
        t = _as_prob_array(t, tol, "JointPMF")
        self.groups, self.tensor = groups, t

    @classmethod
    def _raw(cls, groups, tensor) -> "JointPMF":
        obj = cls.__new__(cls)
        t = np.clip(np.asarray(tensor, dtype=np.float64), 0.0, None)
        t = t / t.sum()
        t.setflags(write=False)
        obj.groups, obj.tensor = tuple(groups), t
        return obj

    @classmethod
    def product(cls, *pmfs: FinitePMF) -> "JointPMF":
        t = pmfs[0].probs
        for p in pmfs[1:]:
            t = np.multiply.outer(t, p.probs)
        return cls._raw(tuple(p.group for p in pmfs), t)

    @property
    def n_vars(self) -> int:
        return len(self.groups)

    def __repr__(self):
        return f"JointPMF({[g.moduli for g in self.groups]}, shape={self.tensor.shape})"

    def _axes(self, indices) -> tuple[int, ...]:
        if isinstance(indices, (int, np.integer)):
            indices = (int(indices),)
        indices = tuple(int(i) for i in indices)
        if not indices:
            raise ValidationError("empty index set")
        for i in indices:
            if not 0 <= i < self.n_vars:
                raise IndexError(f"variable {i} out of range for {self.n_vars} variables")
        if len(set(indices)) != len(indices):
            raise ValidationError(f"repeated index in {indices}")
        return indices

    def marginal(self, indices):
        """Marginal on the given variables, in the given order.

        A single index yields a FinitePMF; several yield a JointPMF.
        """
        axes = self._axes(indices)
        drop = tuple(i for i in range(self.n_vars) if i not in axes)
        t = self.tensor.sum(axis=drop) if drop else self.tensor
        kept = sorted(axes)
        t = np.transpose(t, [kept.index(a) for a in axes])
        if len(axes) == 1:
            return FinitePMF._raw(self.groups[axes[0]], t)
        return JointPMF._raw(tuple(self.groups[a] for a in axes), t)

    def marginal_tensor(self, indices) -> np.ndarray:
        axes = self._axes(indices)
        drop = tuple(i for i in range(self.n_vars) if i not in axes)
        t = self.tensor.sum(axis=drop) if drop else self.tensor
        kept = sorted(axes)
        return np.transpose(t, [kept.index(a) for a in axes])

    def flatten(self) -> FinitePMF:
        """View the joint as a single pmf on the product group."""
        moduli = tuple(m for g in self.groups for m in g.moduli)
        return FinitePMF._raw(GroupSpec.finite(*moduli), self.tensor.ravel())

    def reorder(self, order) -> "JointPMF":
        order = self._axes(order)
        if len(order) != self.n_vars:
            raise ValidationError("reorder needs a full permutation")
        return JointPMF._raw(tuple(self.groups[i] for i in order), np.transpose(self.tensor, order))

    def conditional(self, target, given) -> np.ndarray:
        """p(target | given) as an array over (given..., target...) axes.

        Rows for zero-mass conditioning values are left at zero.
        """
        t_axes, g_axes = self._axes(target), self._axes(given)
        pj = self.marginal_tensor(g_axes + t_axes)
        pg = self.marginal_tensor(g_axes)
        pg_b = pg.reshape(pg.shape + (1,) * len(t_axes))
        with np.errstate(invalid="ignore", divide="ignore"):
            out = np.where(pg_b > 0, pj / np.where(pg_b > 0, pg_b, 1.0), 0.0)
        return out

    def linear_pushforward(self, A) -> "JointPMF":
        """Law of (sum_j a_ij X_j)_i for an integer matrix A (all variables on one group)."""
        rows = A.entries if isinstance(A, IntegerMatrix) else tuple(tuple(r) for r in A)
        g = self.groups[0]
        if any(gi != g for gi in self.groups):
            raise GroupMismatchError("linear maps need all variables on the same group")
        if any(len(r) != self.n_vars for r in rows):
            raise ValidationError(f"matrix rows must have {self.n_vars} entries")
        grids = np.indices(self.tensor.shape).reshape(self.n_vars, -1)
        out_idx = np.zeros(grids.shape[1], dtype=np.int64)
        for row in rows:
            terms = [(a, grids[j]) for j, a in enumerate(row) if a != 0]
            comp = g.combine_indices(terms) if terms else np.zeros(grids.shape[1], dtype=np.int64)
            out_idx = out_idx * g.order + comp
        size = g.order ** len(rows)
        flat = np.bincount(out_idx, weights=self.tensor.ravel(), minlength=size)
        return JointPMF._raw((g,) * len(rows), flat.reshape((g.order,) * len(rows)))

    def with_combination(self, coeffs: Sequence[int]) -> "JointPMF":
        """Append the variable sum_j c_j X_j as a new last axis."""
        n = self.n_vars
        rows = [tuple(int(i == j) for j in range(n)) for i in range(n)] + [tuple(coeffs)]
        return self.linear_pushforward(rows)

    def is_unimodular_image_of(self, other: "JointPMF", A: IntegerMatrix) -> bool:
        return is_unimodular(A) and np.allclose(other.linear_pushforward(A).tensor, self.tensor)


def markov_triple(pxy: JointPMF) -> JointPMF:
    """(X1, Y, X2) with X1, X2 conditionally i.i.d. given Y, each ~ law(X | Y)."""
    if pxy.n_vars != 2:
        raise ValidationError("markov_triple expects a joint over (X, Y)")
    p = pxy.tensor
    py = p.sum(axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        cond = np.where(py > 0, p / np.where(py > 0, py, 1.0), 0.0)  # p(x|y)[x, y]
    t = np.einsum("ay,y,by->ayb", cond, py, cond)
    gx, gy = pxy.groups
    return JointPMF._raw((gx, gy, gx), t)


def markov_from_conditionals(py: FinitePMF, k1: np.ndarray, k2: np.ndarray,
                             gx1: GroupSpec, gx2: GroupSpec) -> JointPMF:
    """(X1, Y, X2) with p(y) k1[x1, y] k2[x2, y]; kernels are column-stochastic."""
    t = np.einsum("ay,y,by->ayb", k1, py.probs, k2)
    return JointPMF._raw((gx1, py.group, gx2), t)


def markov_chain4(pxy: JointPMF, *, tol: float = 1e-12) -> JointPMF:
    """(X2, Y1, X1, Y2) Markov chain whose three adjacent pairs all have law pxy."""
    if pxy.n_vars != 2:
        raise ValidationError("markov_chain4 expects a joint over (X, Y)")
    p = pxy.tensor
    px, py = p.sum(axis=1), p.sum(axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        x_given_y = np.where(py > 0, p / np.where(py > 0, py, 1.0), 0.0)  # [x, y]
        y_given_x = np.where(px[:, None] > 0, p / np.where(px[:, None] > 0, px[:, None], 1.0), 0.0)
    # p(y1) p(x2|y1) p(x1|y1) p(y2|x1)
    t = np.einsum("b,ab,cb,cd->abcd", py, x_given_y, x_given_y, y_given_x)
    gx, gy = pxy.groups
    chain = JointPMF._raw((gx, gy, gx, gy), t)
    for pair in ((0, 1), (2, 1), (2, 3)):
        err = np.max(np.abs(chain.marginal_tensor(pair) - p))
        if err > tol:
            raise ValidationError(f"pair {pair} marginal deviates from pxy by {err:.2e}")
    return chain


# ---------------------------------------------------------------------------
# grids on R^n
# ---------------------------------------------------------------------------

class GridDensity:
    """Piecewise-constant density on the box prod [lo_i, hi_i) with masses per cell."""

    __slots__ = ("lo", "hi", "masses", "meta")

    def __init__(self, lo, hi, masses, *, tol: float = GRID_SUM_TOL, meta: dict | None = None):
        m = _as_prob_array(masses, tol, "GridDensity")
        lo = tuple(float(v) for v in np.atleast_1d(lo))
        hi = tuple(float(v) for v in np.atleast_1d(hi))
        if m.ndim != len(lo) or len(lo) != len(hi):
            raise ValidationError(f"masses have {m.ndim} axes but box has {len(lo)}")
        if any(not (b > a) for a, b in zip(lo, hi)) or not all(map(math.isfinite, lo + hi)):
            raise ValidationError(f"bad box {lo} .. {hi}")
        self.lo, self.hi, self.masses = lo, hi, m
        self.meta = dict(meta or {})

    @classmethod
    def _raw(cls, lo, hi, masses, meta=None) -> "GridDensity":
        m = np.clip(np.asarray(masses, dtype=np.float64), 0.0, None)
        m = m / m.sum()
        m.setflags(write=False)
        obj = cls.__new__(cls)
        obj.lo = tuple(float(v) for v in lo)
        obj.hi = tuple(float(v) for v in hi)
        obj.masses = m
        obj.meta = dict(meta or {})
        return obj

    @classmethod
    def from_density_values(cls, lo, hi, values, meta=None) -> "GridDensity":
        """Cells get mass proportional to the supplied density values."""
        v = np.asarray(values, dtype=np.float64)
        if np.any(v < 0) or not np.any(v > 0):
            raise ValidationError("density values must be nonnegative and not all zero")
        return cls._raw(np.atleast_1d(lo), np.atleast_1d(hi), v / v.sum(), meta)

    @property
    def dim(self) -> int:
        return self.masses.ndim

    @property
    def cells(self) -> tuple[int, ...]:
        return self.masses.shape

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple((b - a) / n for a, b, n in zip(self.lo, self.hi, self.cells))

    @property
    def cell_volume(self) -> float:
        return math.prod(self.spacing)

    def __repr__(self):
        return f"GridDensity(box={list(zip(self.lo, self.hi))}, cells={self.cells})"

    def centers(self, axis: int = 0) -> np.ndarray:
        h = self.spacing[axis]
        return self.lo[axis] + h * (np.arange(self.cells[axis]) + 0.5)

    def edges(self, axis: int = 0) -> np.ndarray:
        return np.linspace(self.lo[axis], self.hi[axis], self.cells[axis] + 1)

    def values(self) -> np.ndarray:
        """Density value on each cell."""
        return self.masses / self.cell_volume

    def axis_marginal(self, axis: int) -> np.ndarray:
        other = tuple(i for i in range(self.dim) if i != axis)
        return self.masses.sum(axis=other) if other else self.masses

    def mean(self) -> np.ndarray:
        return np.array([self.axis_marginal(a) @ self.centers(a) for a in range(self.dim)])

    def covariance(self) -> np.ndarray:
        """Exact covariance of the piecewise-constant density.

        Cell midpoints give the between-cell part; each axis adds h^2/12 for
        the uniform spread inside a cell.
        """
        n = self.dim
        mu = self.mean()
        cov = np.empty((n, n))
        for a in range(n):
            ca = self.centers(a) - mu[a]
            cov[a, a] = self.axis_marginal(a) @ (ca * ca) + self.spacing[a] ** 2 / 12.0
            for b in range(a + 1, n):
                cb = self.centers(b) - mu[b]
                other = tuple(i for i in range(n) if i not in (a, b))
                pab = self.masses.sum(axis=other) if other else self.masses
                cov[a, b] = cov[b, a] = ca @ pab @ cb
        return cov

    def refined(self, k: int) -> "GridDensity":
        """Same density on a grid with every cell split k ways per axis."""
        if k == 1:
            return self
        m = self.masses
        for ax in range(self.dim):
            m = np.repeat(m, k, axis=ax)
        return GridDensity._raw(self.lo, self.hi, m / k ** self.dim, self.meta)

    def negated(self) -> "GridDensity":
        lo = tuple(-b for b in self.hi)
        hi = tuple(-a for a in self.lo)
        return GridDensity._raw(lo, hi, self.masses[(slice(None, None, -1),) * self.dim], self.meta)

    def shifted(self, t) -> "GridDensity":
        t = np.broadcast_to(np.asarray(t, dtype=float), (self.dim,))
        return GridDensity._raw(np.add(self.lo, t), np.add(self.hi, t), self.masses, self.meta)

    def scaled(self, c: float) -> "GridDensity":
        """Law of cX for a real scalar c != 0."""
        c = float(c)
        if c == 0.0:
            raise DegenerateDistributionError("0 * X is a point mass on R^n")
        if c < 0:
            return self.negated().scaled(-c)
        return GridDensity._raw(np.multiply(self.lo, c), np.multiply(self.hi, c), self.masses, self.meta)

    def trimmed(self, threshold: float = 0.0) -> "GridDensity":
        """Drop border cells whose mass is <= threshold (exact zeros by default)."""
        keep = []
        for ax in range(self.dim):
            nz = np.flatnonzero(self.axis_marginal(ax) > threshold)
            if nz.size == 0:
                raise ValidationError("trimming would remove all mass")
            keep.append((int(nz[0]), int(nz[-1]) + 1))
        h = self.spacing
        sl = tuple(slice(a, b) for a, b in keep)
        lo = tuple(self.lo[i] + keep[i][0] * h[i] for i in range(self.dim))
        hi = tuple(self.lo[i] + keep[i][1] * h[i] for i in range(self.dim))
        return GridDensity._raw(lo, hi, self.masses[sl], self.meta)

    def rebinned(self, spacing: Sequence[float]) -> "GridDensity":
        """Exact re-binning onto cells of the given (finer or equal) spacing.

        The new grid starts at ``lo`` and is enlarged to a whole number of cells.
        """
        m = self.masses
        lo, hi = [], []
        for ax, h_new in enumerate(spacing):
            h_old = self.spacing[ax]
            if abs(h_new - h_old) <= 1e-12 * h_old:
                lo.append(self.lo[ax])
                hi.append(self.hi[ax])
                continue
            n_new = int(math.ceil((self.hi[ax] - self.lo[ax]) / h_new - 1e-9))
            # the CDF is linear inside each old cell, so interpolating it is exact
            pos = np.clip(h_new * np.arange(n_new + 1) / h_old, 0.0, self.cells[ax])
            k = np.minimum(np.floor(pos).astype(np.int64), self.cells[ax] - 1)
            frac = pos - k
            mv = np.moveaxis(m, ax, -1)
            cdf = np.concatenate([np.zeros(mv.shape[:-1] + (1,)), np.cumsum(mv, axis=-1)], axis=-1)
            c_new = cdf[..., k] + frac * (cdf[..., k + 1] - cdf[..., k])
            m = np.moveaxis(np.diff(c_new, axis=-1), -1, ax)
            lo.append(self.lo[ax])
            hi.append(self.lo[ax] + n_new * h_new)
        return GridDensity._raw(lo, hi, m, self.meta)

    def is_log_concave(self, tol: float = LOG_CONCAVE_TOL) -> bool:
        return is_log_concave_masses(self.masses, tol)


def is_log_concave_sequence(masses, tol: float = LOG_CONCAVE_TOL) -> bool:
    """Discrete log-concavity: support is an interval and log-masses are concave on it."""
    m = np.asarray(masses, dtype=float)
    nz = np.flatnonzero(m > 0)
    if nz.size == 0:
        return False
    if nz[-1] - nz[0] + 1 != nz.size:
        return False
    lm = np.log(m[nz[0]:nz[-1] + 1])
    if lm.size < 3:
        return True
    return bool(np.all(np.diff(lm, 2) <= tol))


def is_log_concave_masses(masses, tol: float = LOG_CONCAVE_TOL) -> bool:
    """Axis-wise discrete log-concavity of an n-D mass array (every axis line)."""
    m = np.asarray(masses, dtype=float)
    if m.ndim == 1:
        return is_log_concave_sequence(m, tol)
    for ax in range(m.ndim):
        lines = np.moveaxis(m, ax, -1).reshape(-1, m.shape[ax])
        for line in lines:
            if np.any(line > 0) and not is_log_concave_sequence(line, tol):
                return False
    return True


# ---------------------------------------------------------------------------
# parametric families
# ---------------------------------------------------------------------------

_FAMILIES = ("gaussian", "exponential", "uniform", "laplace", "lognormal", "gamma")
LOG_CONCAVE_FAMILIES = ("gaussian", "exponential", "uniform", "laplace")


@dataclass(frozen=True, eq=False)
class ParametricDensity:
    family: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise ValidationError(f"unknown family {self.family!r}")
        p = {k: np.asarray(v, dtype=float) for k, v in self.params.items()}
        f = self.family
        if f == "gaussian":
            mean, cov = np.atleast_1d(p["mean"]), np.atleast_2d(p["cov"])
            n = mean.size
            if cov.shape != (n, n):
                raise ValidationError(f"covariance shape {cov.shape} for mean of size {n}")
            if not np.allclose(cov, cov.T, atol=1e-12, rtol=0):
                raise ValidationError("covariance is not symmetric")
            try:
                np.linalg.cholesky(cov)
            except np.linalg.LinAlgError:
                raise ValidationError("covariance is not positive definite") from None
            p = {"mean": mean, "cov": cov}
        elif f == "exponential":
            if not p["rate"] > 0:
                raise ValidationError("rate must be positive")
            p.setdefault("loc", np.asarray(0.0))
        elif f == "uniform":
            lo, hi = np.atleast_1d(p["lo"]), np.atleast_1d(p["hi"])
            if lo.shape != hi.shape or np.any(hi < lo):
                raise ValidationError("uniform box needs lo <= hi")
            p = {"lo": lo, "hi": hi}
        elif f == "laplace":
            if not p["scale"] > 0:
                raise ValidationError("scale must be positive")
            p.setdefault("loc", np.asarray(0.0))
        elif f == "lognormal":
            if not p["sigma"] > 0:
                raise ValidationError("sigma must be positive")
        elif f == "gamma":
            if not (p["shape"] > 0 and p["rate"] > 0):
                raise ValidationError("shape and rate must be positive")
            p.setdefault("loc", np.asarray(0.0))
        object.__setattr__(self, "params", p)

    # constructors
    @classmethod
    def gaussian(cls, mean=0.0, cov=1.0) -> "ParametricDensity":
        return cls("gaussian", {"mean": mean, "cov": cov})

    @classmethod
    def exponential(cls, rate=1.0, loc=0.0) -> "ParametricDensity":
        return cls("exponential", {"rate": rate, "loc": loc})

    @classmethod
    def uniform(cls, lo=0.0, hi=1.0) -> "ParametricDensity":
        return cls("uniform", {"lo": lo, "hi": hi})

    @classmethod
    def laplace(cls, loc=0.0, scale=1.0) -> "ParametricDensity":
        return cls("laplace", {"loc": loc, "scale": scale})

    @classmethod
    def lognormal(cls, mu=0.0, sigma=1.0) -> "ParametricDensity":
        return cls("lognormal", {"mu": mu, "sigma": sigma})

    @classmethod
    def gamma(cls, shape=1.0, rate=1.0, loc=0.0) -> "ParametricDensity":
        return cls("gamma", {"shape": shape, "rate": rate, "loc": loc})

    def __getitem__(self, key):
        return self.params[key]

    def __repr__(self):
        args = ", ".join(f"{k}={np.round(v, 6).tolist()}" for k, v in self.params.items())
        return f"{self.family}({args})"

    @property
    def dim(self) -> int:
        if self.family == "gaussian":
            return self.params["mean"].size
        if self.family == "uniform":
            return self.params["lo"].size
        return 1

    @property
    def is_degenerate(self) -> bool:
        return self.family == "uniform" and bool(np.any(self["hi"] <= self["lo"]))

    @property
    def is_log_concave(self) -> bool:
        if self.family == "gamma":
            return float(self["shape"]) >= 1.0
        return self.family in LOG_CONCAVE_FAMILIES

    def mean(self) -> np.ndarray:
        f, p = self.family, self.params
        if f == "gaussian":
            return p["mean"].copy()
        if f == "exponential":
            return np.atleast_1d(p["loc"] + 1.0 / p["rate"])
        if f == "uniform":
            return (p["lo"] + p["hi"]) / 2
        if f == "laplace":
            return np.atleast_1d(p["loc"])
        if f == "lognormal":
            return np.atleast_1d(np.exp(p["mu"] + p["sigma"] ** 2 / 2))
        return np.atleast_1d(p["loc"] + p["shape"] / p["rate"])

    def covariance(self) -> np.ndarray:
        f, p = self.family, self.params
        if f == "gaussian":
            return p["cov"].copy()
        if f == "exponential":
            v = 1.0 / p["rate"] ** 2
        elif f == "uniform":
            return np.diag((p["hi"] - p["lo"]) ** 2 / 12.0)
        elif f == "laplace":
            v = 2.0 * p["scale"] ** 2
        elif f == "lognormal":
            s2 = p["sigma"] ** 2
            v = (np.exp(s2) - 1.0) * np.exp(2 * p["mu"] + s2)
        else:
            v = p["shape"] / p["rate"] ** 2
        return np.atleast_2d(v)

    def _marginal_dist(self, axis: int = 0):
        """scipy frozen distribution of coordinate ``axis`` (product families only)."""
        f, p = self.family, self.params
        if f == "gaussian":
            return stats.norm(p["mean"][axis], math.sqrt(p["cov"][axis, axis]))
        if f == "exponential":
            return stats.expon(loc=float(p["loc"]), scale=1.0 / float(p["rate"]))
        if f == "uniform":
            return stats.uniform(p["lo"][axis], p["hi"][axis] - p["lo"][axis])
        if f == "laplace":
            return stats.laplace(float(p["loc"]), float(p["scale"]))
        if f == "lognormal":
            return stats.lognorm(float(p["sigma"]), scale=math.exp(float(p["mu"])))
        return stats.gamma(float(p["shape"]), loc=float(p["loc"]), scale=1.0 / float(p["rate"]))

    def support_box(self, tail: float = DEFAULT_TAIL_MASS) -> tuple[np.ndarray, np.ndarray]:
        """Box carrying all but at most ``tail`` of the mass."""
        n = self.dim
        if self.family == "uniform":
            return self["lo"].copy(), self["hi"].copy()
        lo, hi = np.empty(n), np.empty(n)
        for a in range(n):
            d = self._marginal_dist(a)
            one_sided = self.family in ("exponential", "gamma", "lognormal")
            if one_sided:
                lo[a] = d.ppf(0.0) if self.family != "lognormal" else d.ppf(tail / (2 * n))
                hi[a] = d.isf(tail / (n if self.family != "lognormal" else 2 * n))
            else:
                lo[a] = d.ppf(tail / (2 * n))
                hi[a] = d.isf(tail / (2 * n))
        return lo, hi

    def to_grid(self, cells: int | Sequence[int] | None = None, *, box=None,
                spacing: Sequence[float] | None = None,
                tail: float = DEFAULT_TAIL_MASS) -> GridDensity:
        """Discretize into cell masses, renormalizing away the truncated tails.

        Product families use exact CDF differences; a correlated Gaussian uses
        density values at cell midpoints.  ``meta['truncated_mass']`` records
        the mass lost outside the box.
        """
        if self.is_degenerate:
            raise DegenerateDistributionError("zero-volume uniform box has no density")
        n = self.dim
        if box is None:
            lo, hi = self.support_box(tail)
        else:
            lo, hi = (np.atleast_1d(np.asarray(b, dtype=float)) for b in box)
        if spacing is not None:
            spacing = np.broadcast_to(np.asarray(spacing, dtype=float), (n,))
            ncell = np.ceil((hi - lo) / spacing - 1e-9).astype(int)
            hi = lo + ncell * spacing
        else:
            if cells is None:
                cells = DEFAULT_CELLS if n == 1 else max(16, int(2 ** (20 / n)))
            ncell = np.broadcast_to(np.asarray(cells, dtype=int), (n,)).copy()
        separable = self.family != "gaussian" or np.allclose(
            self["cov"], np.diag(np.diag(self["cov"])), atol=0, rtol=0)
        if separable:
            axes = []
            for a in range(n):
                e = np.linspace(lo[a], hi[a], ncell[a] + 1)
                dist = self._marginal_dist(a)
                # cdf differences on the left half, sf differences on the right (tail accuracy)
                w = np.where(e <= dist.median(), np.diff(dist.cdf(e), append=np.nan),
                             -np.diff(dist.sf(e), append=np.nan))[:-1]
                axes.append(w)
            m = axes[0]
            for extra in axes[1:]:
                m = np.multiply.outer(m, extra)
        else:
            mids = [lo[a] + (hi[a] - lo[a]) * (np.arange(ncell[a]) + 0.5) / ncell[a]
                    for a in range(n)]
            pts = np.stack(np.meshgrid(*mids, indexing="ij"), axis=-1)
            m = stats.multivariate_normal(self["mean"], self["cov"]).pdf(pts)
            m = m * np.prod((hi - lo) / ncell)
        m = np.clip(m, 0.0, None)
        captured = float(m.sum())
        return GridDensity._raw(lo, hi, m, {"truncated_mass": max(0.0, 1.0 - captured),
                                             "source": repr(self)})


# ---------------------------------------------------------------------------
# circle and multiplicative groups
# ---------------------------------------------------------------------------

class CircleDensity:
    """Piecewise-constant density of an angle on m equal cells of [0, 2pi)."""

    __slots__ = ("masses",)

    def __init__(self, masses, *, tol: float = GRID_SUM_TOL):
        m = _as_prob_array(np.ravel(masses), tol, "CircleDensity")
        if m.size < 2:
            raise ValidationError("circle grid needs at least 2 cells")
        self.masses = m

    @classmethod
    def _raw(cls, masses) -> "CircleDensity":
        m = np.clip(np.asarray(masses, dtype=float), 0.0, None)
        obj = cls.__new__(cls)
        obj.masses = m / m.sum()
        return obj

    @classmethod
    def uniform(cls, cells: int) -> "CircleDensity":
        return cls(np.full(cells, 1.0 / cells))

    @classmethod
    def wrapped_gaussian(cls, mu: float, sigma: float, cells: int = 1024,
                         wraps: int = 12) -> "CircleDensity":
        e = np.linspace(0.0, TWO_PI, cells + 1)
        ks = np.arange(-wraps, wraps + 1)[:, None] * TWO_PI
        cdf = special.ndtr((e[None, :] + ks - mu) / sigma).sum(axis=0)
        return cls._raw(np.diff(cdf))

    @classmethod
    def from_angle_density(cls, fn, cells: int = 1024) -> "CircleDensity":
        c = (np.arange(cells) + 0.5) * TWO_PI / cells
        return cls._raw(np.asarray(fn(c), dtype=float))

    @property
    def cells(self) -> int:
        return self.masses.size

    @property
    def spacing(self) -> float:
        return TWO_PI / self.cells

    def negated(self) -> "CircleDensity":
        return CircleDensity._raw(self.masses[::-1])

    def __repr__(self):
        return f"CircleDensity(cells={self.cells})"


class PositiveDensity:
    """A (0, inf)-valued variable X, represented by the law of log X on R."""

    __slots__ = ("log_density",)

    def __init__(self, log_density):
        if isinstance(log_density, GridDensity):
            if log_density.dim != 1:
                raise ValidationError("log-density must be one-dimensional")
        elif isinstance(log_density, ParametricDensity):
            if log_density.dim != 1:
                raise ValidationError("log-density must be one-dimensional")
        else:
            raise ValidationError("PositiveDensity wraps a GridDensity or ParametricDensity")
        self.log_density = log_density

    @classmethod
    def lognormal(cls, mu: float = 0.0, sigma: float = 1.0) -> "PositiveDensity":
        return cls(ParametricDensity.gaussian(mu, sigma ** 2))

    @classmethod
    def from_linear_grid(cls, grid: GridDensity, cells: int | None = None) -> "PositiveDensity":
        """Re-express an x-space grid on (0, inf) as a grid in log x.

        The x-space CDF is piecewise linear, so log-cell masses are exact.
        """
        if grid.dim != 1:
            raise ValidationError("positive variables are one-dimensional")
        if grid.lo[0] <= 0:
            from .errors import DomainError
            raise DomainError("support touches 0; not a (0, inf)-valued variable")
        cells = cells or max(grid.cells[0], DEFAULT_CELLS)
        ylo, yhi = math.log(grid.lo[0]), math.log(grid.hi[0])
        ye = np.linspace(ylo, yhi, cells + 1)
        cdf = np.concatenate([[0.0], np.cumsum(grid.masses)])
        masses = np.diff(np.interp(np.exp(ye), grid.edges(0), cdf))
        return cls(GridDensity._raw((ylo,), (yhi,), masses))

    def __repr__(self):
        return f"PositiveDensity(log X ~ {self.log_density!r})"


class ComplexDensity:
    """A C^x-valued variable through (log|Z|, arg Z): a grid over [lo, hi) x [0, 2pi).

    The angle axis is periodic; ``masses`` has shape (modulus cells, angle cells).
    """

    __slots__ = ("lo", "hi", "masses")

    def __init__(self, lo: float, hi: float, masses, *, tol: float = GRID_SUM_TOL):
        m = _as_prob_array(masses, tol, "ComplexDensity")
        if m.ndim != 2:
            raise ValidationError("complex densities are 2-D (log-modulus x angle)")
        if not hi > lo:
            raise ValidationError("bad log-modulus range")
        self.lo, self.hi, self.masses = float(lo), float(hi), m

    @classmethod
    def _raw(cls, lo, hi, masses) -> "ComplexDensity":
        m = np.clip(np.asarray(masses, dtype=float), 0.0, None)
        obj = cls.__new__(cls)
        obj.lo, obj.hi, obj.masses = float(lo), float(hi), m / m.sum()
        return obj

    @classmethod
    def from_parts(cls, log_modulus: GridDensity, angle: CircleDensity) -> "ComplexDensity":
        """Independent log-modulus and argument."""
        return cls._raw(log_modulus.lo[0], log_modulus.hi[0],
                        np.multiply.outer(log_modulus.masses, angle.masses))

    @property
    def spacing(self) -> tuple[float, float]:
        nr, nt = self.masses.shape
        return (self.hi - self.lo) / nr, TWO_PI / nt

    def modulus_centers(self) -> np.ndarray:
        h = self.spacing[0]
        return self.lo + h * (np.arange(self.masses.shape[0]) + 0.5)

    def negated(self) -> "ComplexDensity":
        """Law of 1/Z."""
        return ComplexDensity._raw(-self.hi, -self.lo, self.masses[::-1, ::-1])

    def __repr__(self):
        return f"ComplexDensity(log|z| in [{self.lo}, {self.hi}), cells={self.masses.shape})"
