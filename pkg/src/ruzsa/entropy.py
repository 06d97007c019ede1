"""Entropies, mutual informations and entropy powers (all in nats)."""
from __future__ import annotations

import math
from typing import Sequence

import numpy as np
from scipy import special

from . import kernels
from .density import (
    CircleDensity,
    ComplexDensity,
    FinitePMF,
    GridDensity,
    JointPMF,
    ParametricDensity,
    PositiveDensity,
)
from .errors import DomainError, ValidationError

EXACT = "exact-discrete"
GRID = "grid"
CLOSED_FORM = "closed-form"

LOG_2PI_E = math.log(2 * math.pi * math.e)


class EntropyValue(float):
    """A float tagged with how it was computed.

    ``-inf`` stands for a degenerate law (no density).
    """

    representation: str

    def __new__(cls, value: float, representation: str):
        obj = super().__new__(cls, value)
        obj.representation = representation
        return obj

    def __repr__(self):
        return f"EntropyValue({float(self)!r}, {self.representation!r})"

    @property
    def is_neg_infinity(self) -> bool:
        return math.isinf(self) and self < 0


def _weaker(*reps: str) -> str:
    order = (EXACT, CLOSED_FORM, GRID)
    return max(reps, key=order.index)


def _grid_entropy(g: GridDensity) -> float:
    return kernels.entropy_nats(g.masses) + math.log(g.cell_volume)


def _closed_form_entropy(d: ParametricDensity) -> float:
    f = d.family
    if d.is_degenerate:
        return -math.inf
    if f == "gaussian":
        n = d.dim
        sign, logdet = np.linalg.slogdet(d["cov"])
        return 0.5 * (n * LOG_2PI_E + logdet)
    if f == "exponential":
        return 1.0 - math.log(float(d["rate"]))
    if f == "uniform":
        return float(np.sum(np.log(d["hi"] - d["lo"])))
    if f == "laplace":
        return 1.0 + math.log(2.0 * float(d["scale"]))
    if f == "lognormal":
        return float(d["mu"]) + 0.5 * (LOG_2PI_E + 2 * math.log(float(d["sigma"])))
    k, lam = float(d["shape"]), float(d["rate"])
    return k - math.log(lam) + special.gammaln(k) + (1.0 - k) * special.digamma(k)


def entropy(d) -> EntropyValue:
    """Entropy w.r.t. the Haar measure of the variable's group.

    Counting measure on finite groups, Lebesgue on R^n, the uniform probability
    on the circle, dx/x on (0, inf) and dr dtheta / r on C^x.
    """
    if isinstance(d, FinitePMF):
        return EntropyValue(kernels.entropy_nats(d.probs), EXACT)
    if isinstance(d, JointPMF):
        return EntropyValue(kernels.entropy_nats(d.tensor), EXACT)
    if isinstance(d, GridDensity):
        return EntropyValue(_grid_entropy(d), GRID)
    if isinstance(d, ParametricDensity):
        return EntropyValue(_closed_form_entropy(d), CLOSED_FORM)
    if isinstance(d, CircleDensity):
        return EntropyValue(kernels.entropy_nats(d.masses) - math.log(d.cells), GRID)
    if isinstance(d, PositiveDensity):
        return entropy(d.log_density)
    if isinstance(d, ComplexDensity):
        hu, ht = d.spacing
        return EntropyValue(kernels.entropy_nats(d.masses) + math.log(hu * ht), GRID)
    raise TypeError(f"no entropy for {type(d).__name__}")


def _subset_entropy(joint: JointPMF, idx) -> float:
    idx = tuple(idx)
    if not idx:
        return 0.0
    return kernels.entropy_nats(joint.marginal_tensor(idx))


def _norm(idx) -> tuple[int, ...]:
    if isinstance(idx, (int, np.integer)):
        return (int(idx),)
    return tuple(int(i) for i in idx)


def conditional_entropy(joint: JointPMF, target, given=()) -> EntropyValue:
    """H(target | given)."""
    t, g = _norm(target), _norm(given)
    if set(t) & set(g):
        raise ValidationError("target and conditioning sets overlap")
    return EntropyValue(_subset_entropy(joint, g + t) - _subset_entropy(joint, g), EXACT)


def mutual_information(joint: JointPMF, a, b) -> EntropyValue:
    a, b = _norm(a), _norm(b)
    if set(a) & set(b):
        raise ValidationError("mutual information of overlapping sets")
    val = _subset_entropy(joint, a) + _subset_entropy(joint, b) - _subset_entropy(joint, a + b)
    return EntropyValue(val, EXACT)


def conditional_mutual_information(joint: JointPMF, a, b, given) -> EntropyValue:
    a, b, g = _norm(a), _norm(b), _norm(given)
    if set(a) & set(b) or set(g) & (set(a) | set(b)):
        raise ValidationError("I(A;B|C) needs disjoint index sets")
    val = (_subset_entropy(joint, a + g) + _subset_entropy(joint, b + g)
           - _subset_entropy(joint, a + b + g) - _subset_entropy(joint, g))
    return EntropyValue(val, EXACT)


def dimension_of(d) -> int:
    if isinstance(d, (GridDensity, ParametricDensity)):
        return d.dim
    if isinstance(d, (CircleDensity, PositiveDensity)):
        return 1
    if isinstance(d, ComplexDensity):
        return 2
    raise ValidationError(f"{type(d).__name__} has no intrinsic dimension; pass dim")


def entropy_power(d, dim: int | None = None, h: float | None = None) -> float:
    """exp(2h/n).  Finite pmfs have no natural n, so ``dim`` is required there."""
    if isinstance(d, (FinitePMF, JointPMF)) and dim is None:
        raise ValidationError("entropy power of a finite pmf needs an explicit dim")
    n = dim if dim is not None else dimension_of(d)
    h = float(entropy(d)) if h is None else h
    return math.exp(2.0 * h / n)


def gaussian_relative_entropy(d) -> float:
    """D(X || G_X) = h(G_X) - h(X), with G_X the Gaussian of matching covariance."""
    if isinstance(d, ParametricDensity) and d.family == "gaussian":
        return 0.0
    if not isinstance(d, (GridDensity, ParametricDensity)):
        raise ValidationError("Gaussian relative entropy is defined on R^n densities")
    cov = d.covariance()
    sign, logdet = np.linalg.slogdet(cov)
    if sign <= 0:
        raise ValidationError("covariance is singular")
    hg = 0.5 * (d.dim * LOG_2PI_E + logdet)
    return hg - float(entropy(d))


def _expected_log_on_cells(edges: np.ndarray, masses: np.ndarray) -> float:
    """E[log X] for a piecewise-constant density on (0, inf) (exact per cell)."""
    a, b = edges[:-1], edges[1:]
    prim = lambda x: x * np.log(x) - x
    return float(np.sum(masses * (prim(b) - prim(a)) / (b - a)))


def _quadrature_log_entropy(edges: np.ndarray, masses: np.ndarray, order: int = 8) -> float:
    """-int g log g over y = log x by Gauss-Legendre on each cell (cross-check)."""
    nodes, weights = np.polynomial.legendre.leggauss(order)
    ya, yb = np.log(edges[:-1]), np.log(edges[1:])
    f = masses / np.diff(edges)
    half = (yb - ya)[:, None] / 2
    y = (ya + yb)[:, None] / 2 + half * nodes[None, :]
    keep = f > 0
    g = f[keep, None] * np.exp(y[keep])
    vals = -(g * np.log(g)) @ weights
    return float(np.sum(vals * half[keep, 0]))


def multiplicative_entropy(d) -> EntropyValue:
    """Entropy w.r.t. dx/x of a (0, inf)-valued variable.

    Accepts a ``PositiveDensity`` (log-space representation) or an x-space
    ``GridDensity`` / ``ParametricDensity`` supported in (0, inf), in which
    case h_x = h(X) - E[log X].
    """
    if isinstance(d, PositiveDensity):
        return entropy(d)
    if isinstance(d, GridDensity):
        if d.dim != 1:
            raise ValidationError("multiplicative entropy of a 1-D density")
        if d.lo[0] <= 0:
            raise DomainError("support touches 0; h_x is undefined")
        e = d.edges(0)
        val = _grid_entropy(d) - _expected_log_on_cells(e, d.masses)
        check = _quadrature_log_entropy(e, d.masses)
        if not math.isclose(val, check, rel_tol=1e-8, abs_tol=1e-9):
            raise ValidationError(f"h_x identity mismatch: {val} vs quadrature {check}")
        return EntropyValue(val, GRID)
    if isinstance(d, ParametricDensity):
        if d.family == "lognormal":
            return EntropyValue(0.5 * (LOG_2PI_E + 2 * math.log(float(d["sigma"]))), CLOSED_FORM)
        if d.family == "uniform" and d.dim == 1 and float(d["lo"][0]) > 0:
            a, b = float(d["lo"][0]), float(d["hi"][0])
            elog = (b * math.log(b) - b - a * math.log(a) + a) / (b - a)
            return EntropyValue(math.log(b - a) - elog, CLOSED_FORM)
        raise DomainError(f"{d.family} support is not contained in (0, inf)")
    raise TypeError(f"no multiplicative entropy for {type(d).__name__}")


def additive_entropy_of_positive(d: PositiveDensity) -> EntropyValue:
    """Lebesgue entropy of X = exp(Y): h(Y) + E[Y]."""
    ld = d.log_density
    hy = entropy(ld)
    return EntropyValue(float(hy) + float(ld.mean()[0]), hy.representation)


def expected_log(d: PositiveDensity) -> float:
    return float(d.log_density.mean()[0])


def expected_log_modulus(d: ComplexDensity) -> float:
    return float(d.masses.sum(axis=1) @ d.modulus_centers())


def circle_relative_entropy(d: CircleDensity) -> float:
    """D(theta || uniform) = -h(theta)."""
    return -float(entropy(d))


def complex_multiplicative_entropy(d: ComplexDensity) -> EntropyValue:
    return entropy(d)


def complex_additive_entropy(d: ComplexDensity) -> EntropyValue:
    """Lebesgue entropy on R^2 of Z: h_x(Z) + 2 E log|Z|."""
    return EntropyValue(float(entropy(d)) + 2.0 * expected_log_modulus(d), GRID)


def joint_entropies(joint: JointPMF, subsets: Sequence[Sequence[int]]) -> list[float]:
    return [_subset_entropy(joint, tuple(s)) for s in subsets]
