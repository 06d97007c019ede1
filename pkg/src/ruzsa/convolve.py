"""Laws of X + Y and X - Y for independent X, Y.

Finite groups convolve exactly (direct sum or FFT). Piecewise-constant
densities on equal cells have a piecewise-linear sum density, which is
stored through its exact cell averages.
"""
from __future__ import annotations

import math
from typing import Sequence

import numpy as np
from scipy import signal

from . import kernels
from .density import (
    DEFAULT_CELLS,
    CircleDensity,
    ComplexDensity,
    FinitePMF,
    GridDensity,
    ParametricDensity,
    PositiveDensity,
)
from .groups import identity as group_identity
from .errors import DegenerateDistributionError, GridResolutionError, GroupMismatchError, ValidationError

MAX_GRID_CELLS = 2 ** 22
NAIVE_MAX_ORDER = 64
SPACING_RTOL = 1e-9


def _check_sign(sign) -> int:
    if sign not in (1, -1, "+", "-"):
        raise ValidationError(f"sign must be +1 or -1, got {sign!r}")
    return -1 if sign in (-1, "-") else 1


# ---------------------------------------------------------------------------
# finite groups
# ---------------------------------------------------------------------------

def convolve_fft(p: np.ndarray, q: np.ndarray, moduli: Sequence[int]) -> np.ndarray:
    shape = tuple(moduli)
    a = np.asarray(p, dtype=float).reshape(shape)
    b = np.asarray(q, dtype=float).reshape(shape)
    ax = tuple(range(len(shape)))
    out = np.fft.irfftn(np.fft.rfftn(a, axes=ax) * np.fft.rfftn(b, axes=ax), s=shape, axes=ax)
    return out.ravel()


def _finite(p: FinitePMF, q: FinitePMF, sign: int, method: str) -> FinitePMF:
    if p.group != q.group:
        raise GroupMismatchError(f"{p.group} vs {q.group}")
    if sign < 0:
        q = q.negated()
    if method == "auto":
        method = "naive" if p.group.order <= NAIVE_MAX_ORDER else "fft"
    if method == "naive":
        r = kernels.cyclic_convolve_naive(p.probs, q.probs, p.group.moduli)
    elif method == "fft":
        r = convolve_fft(p.probs, q.probs, p.group.moduli)
    else:
        raise ValidationError(f"unknown method {method!r}")
    return FinitePMF._raw(p.group, r)


# ---------------------------------------------------------------------------
# grids on R^n
# ---------------------------------------------------------------------------

def _cell_average(r: np.ndarray, cyclic_axes: Sequence[int] = ()) -> np.ndarray:
    """Average adjacent node values along every axis.

    Non-cyclic axes grow by one (zero padding on both ends); cyclic axes keep
    their length and wrap.
    """
    for ax in range(r.ndim):
        if ax in cyclic_axes:
            r = 0.5 * (r + np.roll(r, 1, axis=ax))
        else:
            pad = [(0, 0)] * r.ndim
            pad[ax] = (1, 1)
            rp = np.pad(r, pad)
            lo = [slice(None)] * r.ndim
            hi = [slice(None)] * r.ndim
            lo[ax], hi[ax] = slice(None, -1), slice(1, None)
            r = 0.5 * (rp[tuple(lo)] + rp[tuple(hi)])
    return r


def _common_spacing(a: GridDensity, b: GridDensity) -> tuple[GridDensity, GridDensity]:
    sa, sb = a.spacing, b.spacing
    if all(math.isclose(x, y, rel_tol=SPACING_RTOL) for x, y in zip(sa, sb)):
        return a, b
    target = tuple(min(x, y) for x, y in zip(sa, sb))
    return a.rebinned(target), b.rebinned(target)


def _grid_add(a: GridDensity, b: GridDensity, max_cells: int) -> GridDensity:
    if a.dim != b.dim:
        raise GroupMismatchError(f"R^{a.dim} vs R^{b.dim}")
    a, b = _common_spacing(a, b)
    out_cells = [n1 + n2 for n1, n2 in zip(a.cells, b.cells)]
    if math.prod(out_cells) > max_cells:
        raise GridResolutionError(
            f"sum grid would have {math.prod(out_cells)} cells (cap {max_cells}); "
            "trim the inputs or use fewer cells")
    r = signal.convolve(a.masses, b.masses, mode="full", method="auto")
    m = _cell_average(np.clip(r, 0.0, None))
    h = a.spacing
    lo = tuple(x + y for x, y in zip(a.lo, b.lo))
    hi = tuple(l + n * s for l, n, s in zip(lo, out_cells, h))
    meta = {"truncated_mass": a.meta.get("truncated_mass", 0.0) + b.meta.get("truncated_mass", 0.0)}
    return GridDensity._raw(lo, hi, m, meta)


# ---------------------------------------------------------------------------
# parametric families
# ---------------------------------------------------------------------------

def scale_parametric(d: ParametricDensity, c: float):
    """Law of cX; a ParametricDensity when the family is closed under scaling, else None."""
    f = d.family
    if f == "gaussian":
        return ParametricDensity.gaussian(c * d["mean"], c * c * d["cov"])
    if f == "uniform":
        lo, hi = c * d["lo"], c * d["hi"]
        return ParametricDensity.uniform(np.minimum(lo, hi), np.maximum(lo, hi))
    if f == "laplace":
        return ParametricDensity.laplace(c * float(d["loc"]), abs(c) * float(d["scale"]))
    if c > 0 and f == "exponential":
        return ParametricDensity.exponential(float(d["rate"]) / c, c * float(d["loc"]))
    if c > 0 and f == "gamma":
        return ParametricDensity.gamma(float(d["shape"]), float(d["rate"]) / c, c * float(d["loc"]))
    return None


def _gamma_view(d: ParametricDensity):
    if d.family == "exponential":
        return 1.0, float(d["rate"]), float(d["loc"])
    if d.family == "gamma":
        return float(d["shape"]), float(d["rate"]), float(d["loc"])
    return None


def _parametric_closed_form(a: ParametricDensity, b: ParametricDensity, sign: int):
    if a.dim != b.dim:
        raise GroupMismatchError(f"R^{a.dim} vs R^{b.dim}")
    if a.family == b.family == "gaussian":
        return ParametricDensity.gaussian(a["mean"] + sign * b["mean"], a["cov"] + b["cov"])
    ga, gb = _gamma_view(a), _gamma_view(b)
    if ga and gb and math.isclose(ga[1], gb[1], rel_tol=1e-15):
        if sign > 0:
            return ParametricDensity.gamma(ga[0] + gb[0], ga[1], ga[2] + gb[2])
        if ga[0] == gb[0] == 1.0:
            return ParametricDensity.laplace(ga[2] - gb[2], 1.0 / ga[1])
    return None


def _natural_spacing(d: ParametricDensity, cells: int, tail: float) -> np.ndarray:
    lo, hi = d.support_box(tail)
    return (hi - lo) / cells


def parametric_to_grid_pair(a: ParametricDensity, b, cells: int = DEFAULT_CELLS,
                            tail: float = 1e-9):
    """Discretize parametric operands onto a shared spacing."""
    sp = []
    for d in (a, b):
        if isinstance(d, ParametricDensity):
            sp.append(_natural_spacing(d, cells, tail))
        else:
            sp.append(np.asarray(d.spacing))
    spacing = np.minimum(sp[0], sp[1])
    out = []
    for d in (a, b):
        out.append(d.to_grid(spacing=spacing, tail=tail) if isinstance(d, ParametricDensity) else d)
    return out


# ---------------------------------------------------------------------------
# circle and multiplicative groups
# ---------------------------------------------------------------------------

def _circle(a: CircleDensity, b: CircleDensity, sign: int) -> CircleDensity:
    if a.cells != b.cells:
        raise GroupMismatchError("circle densities need the same number of cells")
    if sign < 0:
        b = b.negated()
    r = convolve_fft(a.masses, b.masses, (a.cells,))
    r = np.clip(r, 0.0, None)
    # cell c of the sum collects node values r[c-1] and r[c]
    m = 0.5 * (r + np.roll(r, 1))
    return CircleDensity._raw(m)


def _complex(a: ComplexDensity, b: ComplexDensity, sign: int, max_cells: int) -> ComplexDensity:
    if a.masses.shape[1] != b.masses.shape[1]:
        raise GroupMismatchError("complex densities need the same number of angle cells")
    if sign < 0:
        b = b.negated()
    ha, hb = a.spacing[0], b.spacing[0]
    if not math.isclose(ha, hb, rel_tol=SPACING_RTOL):
        h = min(ha, hb)
        ga = GridDensity._raw((a.lo, 0.0), (a.hi, 2 * math.pi), a.masses).rebinned((h, a.spacing[1]))
        gb = GridDensity._raw((b.lo, 0.0), (b.hi, 2 * math.pi), b.masses).rebinned((h, b.spacing[1]))
        a = ComplexDensity._raw(ga.lo[0], ga.hi[0], ga.masses)
        b = ComplexDensity._raw(gb.lo[0], gb.hi[0], gb.masses)
    n1, m = a.masses.shape
    n2 = b.masses.shape[0]
    if (n1 + n2) * m > max_cells:
        raise GridResolutionError(f"product grid would have {(n1 + n2) * m} cells")
    L = n1 + n2 - 1
    r = np.fft.ifft2(np.fft.fft2(a.masses, s=(L, m)) * np.fft.fft2(b.masses, s=(L, m))).real
    out = _cell_average(np.clip(r, 0.0, None), cyclic_axes=(1,))
    h = a.spacing[0]
    lo = a.lo + b.lo
    return ComplexDensity._raw(lo, lo + (n1 + n2) * h, out)


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------

def convolve(p, q, sign=1, *, method: str = "auto", cells: int = DEFAULT_CELLS,
             max_cells: int = MAX_GRID_CELLS):
    """Law of p + q (sign=+1) or p - q (sign=-1) for independent operands.

    For positive and complex variables the group operation is multiplication,
    so sign=-1 gives the law of p / q.
    """
    sign = _check_sign(sign)
    if isinstance(p, FinitePMF) or isinstance(q, FinitePMF):
        if not (isinstance(p, FinitePMF) and isinstance(q, FinitePMF)):
            raise GroupMismatchError("cannot combine a finite-group pmf with a density")
        return _finite(p, q, sign, method)
    if isinstance(p, CircleDensity) and isinstance(q, CircleDensity):
        return _circle(p, q, sign)
    if isinstance(p, PositiveDensity) and isinstance(q, PositiveDensity):
        return PositiveDensity(convolve(p.log_density, q.log_density, sign,
                                        cells=cells, max_cells=max_cells))
    if isinstance(p, ComplexDensity) and isinstance(q, ComplexDensity):
        return _complex(p, q, sign, max_cells)
    real = (GridDensity, ParametricDensity)
    if not (isinstance(p, real) and isinstance(q, real)):
        raise GroupMismatchError(f"cannot combine {type(p).__name__} with {type(q).__name__}")
    if p.dim != q.dim:
        raise GroupMismatchError(f"R^{p.dim} vs R^{q.dim}")
    if isinstance(p, ParametricDensity) and isinstance(q, ParametricDensity):
        closed = _parametric_closed_form(p, q, sign)
        if closed is not None:
            return closed
    if isinstance(q, ParametricDensity) and q.is_degenerate:
        pt = q["lo"]
        return p.shifted(sign * pt) if isinstance(p, GridDensity) else convolve(
            p.to_grid(cells), q, sign, max_cells=max_cells)
    if isinstance(p, ParametricDensity) and p.is_degenerate:
        return convolve(q, p, 1, max_cells=max_cells) if sign > 0 else convolve(
            negate(q), p, 1, max_cells=max_cells)
    if sign < 0:
        q = negate(q)
        if isinstance(q, ParametricDensity) and isinstance(p, ParametricDensity):
            closed = _parametric_closed_form(p, q, 1)
            if closed is not None:
                return closed
    if isinstance(p, ParametricDensity) or isinstance(q, ParametricDensity):
        p, q = parametric_to_grid_pair(p, q, cells)
    return _grid_add(p, q, max_cells)


def negate(d):
    """Law of -X (the group inverse)."""
    if isinstance(d, (FinitePMF, GridDensity, CircleDensity, ComplexDensity)):
        return d.negated()
    if isinstance(d, PositiveDensity):
        return PositiveDensity(negate(d.log_density))
    if isinstance(d, ParametricDensity):
        s = scale_parametric(d, -1.0)
        return s if s is not None else d.to_grid().negated()
    raise TypeError(f"cannot negate {type(d).__name__}")


def scale(d, c):
    """Law of cX (integer c on finite groups, real c on R^n)."""
    if isinstance(d, FinitePMF):
        return d.scaled(c)
    if c == 0:
        raise DegenerateDistributionError("0 * X is a point mass")
    if isinstance(d, GridDensity):
        return d.scaled(c)
    if isinstance(d, ParametricDensity):
        s = scale_parametric(d, float(c))
        return s if s is not None else d.to_grid().scaled(c)
    raise TypeError(f"cannot scale {type(d).__name__}")


def weighted_sum(operands: Sequence, coeffs: Sequence, **kw):
    """Law of sum_i c_i X_i for independent X_i.

    Zero coefficients contribute the identity and are dropped; if every
    coefficient is zero the result is a point mass (an error for densities).
    """
    if len(operands) != len(coeffs) or not operands:
        raise ValidationError("need matching, non-empty operand and coefficient lists")
    terms = [(d, c) for d, c in zip(operands, coeffs) if c != 0]
    if not terms:
        first = operands[0]
        if isinstance(first, FinitePMF):
            return FinitePMF.point_mass(first.group, group_identity(first.group))
        raise DegenerateDistributionError("all coefficients are zero")
    acc = None
    for d, c in terms:
        if c == -1:
            term, s = d, -1
        else:
            term, s = scale(d, c), 1
        if acc is None:
            acc = term if s > 0 else negate(term)
        else:
            acc = convolve(acc, term, s, **kw)
    return acc


def self_convolve(p, k: int, signs: Sequence[int] | None = None, **kw):
    """Law of s_1 X_1 + ... + s_k X_k for i.i.d. copies of p."""
    if k < 1:
        raise ValidationError("need at least one copy")
    signs = [1] * k if signs is None else [_check_sign(s) for s in signs]
    if len(signs) != k:
        raise ValidationError(f"{len(signs)} signs for {k} copies")
    acc = p if signs[0] > 0 else negate(p)
    for s in signs[1:]:
        acc = convolve(acc, p, s, **kw)
    return acc
