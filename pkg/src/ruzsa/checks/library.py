"""Definitions of every registered inequality check.

Each check receives a ``Context`` plus its inputs and returns an ``Outcome``
listing the inequalities ``lhs <= rhs`` it evaluates.
"""
from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from ..convolve import _cell_average
from ..density import (
    CircleDensity,
    ComplexDensity,
    FinitePMF,
    GridDensity,
    JointPMF,
    ParametricDensity,
    PositiveDensity,
    markov_chain4,
    markov_triple,
)
from ..entropy import (
    CLOSED_FORM,
    EXACT,
    GRID,
    LOG_2PI_E,
    additive_entropy_of_positive,
    complex_additive_entropy,
    conditional_mutual_information,
    dimension_of,
    expected_log,
    expected_log_modulus,
    gaussian_relative_entropy,
    mutual_information,
)
from ..errors import GroupMismatchError, PreconditionError, ValidationError
from ..groups import GroupSpec, difference_set
from ..metrics import MARKOV_TOL, _combo_with, conditional_ruzsa_divergence, ruzsa_difference
from .registry import register
from .result import CONJECTURE, OBSERVATIONAL, Outcome, Part

LOG2 = math.log(2.0)
RATIO_GUARD = 1e-9
PD_SYM_TOL = 1e-12


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------

def _require_finite(*ds):
    for d in ds:
        if not isinstance(d, FinitePMF):
            raise PreconditionError(f"needs finite-group pmfs, got {type(d).__name__}")
    g = ds[0].group
    if any(d.group != g for d in ds):
        raise GroupMismatchError("all pmfs must live on the same group")


def _require_density(d):
    if isinstance(d, (FinitePMF, JointPMF)):
        raise PreconditionError("needs a density on R^n (grid or parametric), not a finite pmf")
    if not isinstance(d, (GridDensity, ParametricDensity)):
        raise PreconditionError(f"needs a density on R^n, got {type(d).__name__}")


def _require_log_concave(d, assume: bool = False):
    _require_density(d)
    if assume:
        return
    ok = d.is_log_concave() if isinstance(d, GridDensity) else d.is_log_concave
    if not ok:
        raise PreconditionError("input is not log-concave")


def _ratio_parts(num: float, den: float, lo: float, hi: float, what: str):
    """Parts for lo <= num/den <= hi, or a skip reason for a tiny denominator."""
    if abs(den) <= RATIO_GUARD:
        return None, f"{what} denominator {den:.3e} below guard {RATIO_GUARD}"
    r = num / den
    return [Part("lower", lo, r), Part("upper", r, hi)], None


def _sigmas(ctx, p) -> tuple[float, float, float, float, int]:
    """(sigma_plus, sigma_minus, h(X), h(X+X'), n)."""
    n = dimension_of(p)
    hx = ctx.h(p)
    hp = ctx.h(ctx.conv(p, p, 1))
    hm = ctx.h(ctx.conv(p, p, -1))
    sp = 0.5 * math.exp(2.0 * (hp - hx) / n)
    sm = 0.5 * math.exp(2.0 * (hm - hx) / n)
    return sp, sm, hx, hp, n


def _gauss_D(ctx, p) -> float:
    ctx.note(GRID if isinstance(p, GridDensity) else CLOSED_FORM)
    return gaussian_relative_entropy(p)


def as_pd_matrix(K) -> np.ndarray:
    """Validate a symmetric positive-definite matrix (Cholesky)."""
    K = np.atleast_2d(np.asarray(K, dtype=float))
    if K.shape[0] != K.shape[1]:
        raise ValidationError(f"matrix of shape {K.shape} is not square")
    if not np.allclose(K, K.T, atol=PD_SYM_TOL * max(1.0, np.abs(K).max()), rtol=0):
        raise ValidationError("matrix is not symmetric")
    try:
        np.linalg.cholesky(K)
    except np.linalg.LinAlgError:
        raise ValidationError("matrix is not positive definite") from None
    return K


# ---------------------------------------------------------------------------
# divergence inequalities (any group)
# ---------------------------------------------------------------------------

@register("ruzsa_triangle", "Triangle inequality for Ruzsa divergence")
def ruzsa_triangle(ctx, p1, p2, p3):
    return Outcome([Part("triangle", ctx.dR(p1, p3), ctx.dR(p1, p2) + ctx.dR(p2, p3))])


@register("ruzsa_triangle_sharp", "Sharpened Ruzsa triangle inequality", domain="finite")
def ruzsa_triangle_sharp(ctx, p1, p2, p3):
    _require_finite(p1, p2, p3)
    g = p1.group
    n = g.order
    # joint of (X1, W = X2 - X3, X2); X3 = X2 - W
    x3 = g.combine_indices([(1, np.arange(n)[None, :]), (-1, np.arange(n)[:, None])])
    t = p1.probs[:, None, None] * (p2.probs[None, :] * p3.probs[x3])[None, :, :]
    joint = JointPMF._raw((g, g, g), t)
    cond = float(conditional_ruzsa_divergence(joint, 0, 2, (1,)))
    return Outcome([Part("sharp-triangle", ctx.dR(p1, p3), cond + ctx.dR(p2, p3))],
                   {"conditional_term": cond})


@register("subadditivity", "Subadditivity of Ruzsa divergence")
def subadditivity(ctx, p, q1, q2):
    return Outcome([Part("subadditivity", ctx.dR(p, ctx.conv(q1, q2)),
                         ctx.dR(p, q1) + ctx.dR(p, q2))])


@register("monotonicity", "Monotonicity of Ruzsa divergence under addition")
def monotonicity(ctx, p1, p2, q):
    return Outcome([Part("monotonicity", ctx.dR(ctx.conv(p1, p2), q), ctx.dR(p1, q))])


@register("plunnecke_ruzsa", "Entropic Plunnecke-Ruzsa inequality")
def plunnecke_ruzsa(ctx, p, *qs):
    if not qs:
        raise PreconditionError("needs at least one Y_i")
    total = qs[0]
    for q in qs[1:]:
        total = ctx.conv(total, q)
    return Outcome([Part("plunnecke-ruzsa", ctx.dR(p, total), sum(ctx.dR(p, q) for q in qs))],
                   {"k": len(qs)})


@register("submodularity", "Submodularity of entropy of independent sums")
def submodularity(ctx, p, q, r):
    xz, yz = ctx.conv(p, r), ctx.conv(q, r)
    xyz = ctx.conv(xz, q)
    return Outcome([Part("submodularity", ctx.h(xyz) + ctx.h(r), ctx.h(xz) + ctx.h(yz))])


@register("sum_difference", "Sum-difference inequality for Ruzsa divergence")
def sum_difference(ctx, p, q):
    return Outcome([Part("sum-difference", ctx.dR(p, _neg(q)), 2 * ctx.dR(p, q) + ctx.dR(q, p))])


def _neg(d):
    from ..convolve import negate
    return negate(d)


@register("doubling_difference_ratio", "Sum-difference ratio bounds for i.i.d. copies")
def doubling_difference_ratio(ctx, p):
    hx = ctx.h(p)
    num = ctx.h(ctx.conv(p, p, 1)) - hx
    den = ctx.h(ctx.conv(p, p, -1)) - hx
    parts, skip = _ratio_parts(num, den, 0.5, 2.0, "h(X-X')-h(X)")
    return Outcome(parts or [], {"numerator": num, "denominator": den}, skipped=skip)


LEFT_SIDES = ("aX+Z", "aX+bX'")


@register("weighted_sum_lemma", "Weighted-sum entropy lemma")
def weighted_sum_lemma(ctx, p, z, a: int, b: int, left: str = "aX+Z"):
    a, b = int(a), int(b)
    if a == 0 or b == 0:
        raise PreconditionError("a and b must be nonzero integers")
    if left not in LEFT_SIDES:
        raise ValidationError(f"left side must be one of {LEFT_SIDES}")
    lhs_law = ctx.wsum([p, z], [a, 1]) if left == "aX+Z" else ctx.wsum([p, p], [a, b])
    h_left = ctx.h(lhs_law)
    d_xx = ctx.dR(p, p)
    parts = []
    if a != b:
        mid = ctx.wsum([p, p, z], [a - b, b, 1])
    else:
        mid = ctx.wsum([p, z], [b, 1])
    parts.append(Part("first", h_left, ctx.h(mid) + d_xx))
    if a % 2 == 0:
        half = ctx.wsum([p, z], [a // 2, 1])
        two_minus = ctx.wsum([p, p], [2, -1])
        parts.append(Part("even", h_left, ctx.h(half) + ctx.h(two_minus) - ctx.h(p)))
    return Outcome(parts, {"left_side": left, "a": a, "b": b})


def tau(a: int, b: int) -> float:
    return 6.0 * (math.floor(math.log(abs(a))) + math.floor(math.log(abs(b))) + 2)


@register("weighted_sum_theorem", "Weighted-sum entropy theorem")
def weighted_sum_theorem(ctx, p, q, a: int, b: int):
    a, b = int(a), int(b)
    if a < 1 or b < 1:
        raise PreconditionError("a and b must be positive integers (tau needs log|a|, log|b|)")
    lhs = ctx.h(ctx.wsum([p, q], [a, b])) - ctx.h(ctx.conv(p, q))
    rhs = tau(a, b) * (ctx.dR(p, _neg(q)) + ctx.dR(q, _neg(p)))
    return Outcome([Part("weighted-sum", lhs, rhs)], {"tau": tau(a, b), "a": a, "b": b})


# ---------------------------------------------------------------------------
# conditional / dependent (finite groups)
# ---------------------------------------------------------------------------

def _same_group(joint: JointPMF, axes):
    g = joint.groups[axes[0]]
    if any(joint.groups[i] != g for i in axes):
        raise GroupMismatchError("variables combined by +/- must share a group")


@register("cond_reduces", "Conditioning reduces Ruzsa divergence", domain="finite")
def cond_reduces(ctx, px: FinitePMF, jyz: JointPMF):
    if not isinstance(px, FinitePMF) or not isinstance(jyz, JointPMF) or jyz.n_vars != 2:
        raise PreconditionError("needs a pmf for X and a joint over (Y, Z)")
    if jyz.groups[1] != px.group:
        raise GroupMismatchError("X and Z must share a group")
    joint = JointPMF._raw((px.group,) + jyz.groups, np.multiply.outer(px.probs, jyz.tensor))
    cond = float(conditional_ruzsa_divergence(joint, 0, 2, (1,)))
    pz = jyz.marginal(1)
    d = ctx.dR(px, pz)
    t = _combo_with(joint, {0: 1, 2: -1}, (1,))
    from .. import kernels
    i_y = (kernels.entropy_nats(t.sum(axis=1)) + kernels.entropy_nats(t.sum(axis=0))
           - kernels.entropy_nats(t))
    return Outcome([Part("conditioning", cond, d)],
                   {"decomposition_residual": d - cond - i_y, "I(Y;X-Z)": i_y})


def _markov_ok(joint, a, b, given):
    gap = float(conditional_mutual_information(joint, a, b, given))
    if gap > MARKOV_TOL:
        raise PreconditionError(f"not Markov: I = {gap:.3e}")
    return gap


@register("cond_ruzsa_bound", "Bound on conditional Ruzsa divergence", domain="finite")
def cond_ruzsa_bound(ctx, triple: JointPMF):
    if not isinstance(triple, JointPMF) or triple.n_vars != 3:
        raise PreconditionError("needs a joint over (X1, Y, X2)")
    _same_group(triple, (0, 1, 2))
    _markov_ok(triple, 0, 2, (1,))
    lhs = float(conditional_ruzsa_divergence(triple, 0, 2, (1,)))
    rhs = (2 * float(mutual_information(triple, 0, 1)) + float(mutual_information(triple, 2, 1))
           + float(ruzsa_difference(triple, 0, 1)) + float(ruzsa_difference(triple, 1, 2)))
    return Outcome([Part("conditional-bound", lhs, rhs)])


@register("cond_ruzsa_symmetric", "Symmetric bound on conditional Ruzsa divergence", domain="finite")
def cond_ruzsa_symmetric(ctx, pxy: JointPMF):
    if not isinstance(pxy, JointPMF) or pxy.n_vars != 2:
        raise PreconditionError("needs a joint over (X, Y)")
    _same_group(pxy, (0, 1))
    triple = markov_triple(pxy)
    lhs = float(conditional_ruzsa_divergence(triple, 0, 2, (1,)))
    rhs = (3 * float(mutual_information(pxy, 0, 1)) + float(ruzsa_difference(pxy, 0, 1))
           + float(ruzsa_difference(pxy, 1, 0)))
    return Outcome([Part("symmetric-bound", lhs, rhs)])


@register("bsg", "Entropic Balog-Szemeredi-Gowers inequality", domain="finite")
def bsg(ctx, pxy: JointPMF):
    if not isinstance(pxy, JointPMF) or pxy.n_vars != 2:
        raise PreconditionError("needs a joint over (X, Y)")
    _same_group(pxy, (0, 1))
    chain = markov_chain4(pxy)  # axes: X2, Y1, X1, Y2
    g1 = _markov_ok(chain, (0,), (2, 3), (1,))
    g2 = _markov_ok(chain, (0, 1), (3,), (2,))
    given = (2, 1)
    lhs = (float(conditional_ruzsa_divergence(chain, 0, 3, given))
           + float(conditional_ruzsa_divergence(chain, 3, 0, given)))
    rhs = (3 * float(mutual_information(pxy, 0, 1)) + float(ruzsa_difference(pxy, 0, 1))
           + float(ruzsa_difference(pxy, 1, 0)))
    return Outcome([Part("bsg", lhs, rhs)], {"chain_gaps": [g1, g2]})


# ---------------------------------------------------------------------------
# discrete sets and observational ratio
# ---------------------------------------------------------------------------

@register("sumset_triangle", "Ruzsa triangle inequality for sets", domain="set")
def sumset_triangle(ctx, A, B, C, g: GroupSpec):
    lhs = len(difference_set(A, C, g)) * len(B)
    rhs = len(difference_set(A, B, g)) * len(difference_set(B, C, g))
    return Outcome([Part("set-triangle", float(lhs), float(rhs))])


@register("discrete_sd_ratio", "Discrete sum-difference entropy ratio (cited observation)",
          status=OBSERVATIONAL, domain="finite")
def discrete_sd_ratio(ctx, p):
    _require_finite(p)
    num = ctx.h(ctx.conv(p, p, 1))
    den = ctx.h(ctx.conv(p, p, -1))
    parts, skip = _ratio_parts(num, den, 0.75, 4.0 / 3.0, "h(X-X')")
    return Outcome(parts or [], {"h_sum": num, "h_diff": den}, skipped=skip)


# ---------------------------------------------------------------------------
# multiplicative groups and the circle
# ---------------------------------------------------------------------------

@register("multiplicative_pair", "Sum-difference bounds on the positive reals", domain="positive")
def multiplicative_pair(ctx, p: PositiveDensity):
    if not isinstance(p, PositiveDensity):
        raise PreconditionError("needs a PositiveDensity")
    prod, quot = ctx.conv(p, p, 1), ctx.conv(p, p, -1)
    h_prod = float(additive_entropy_of_positive(prod))
    h_quot = float(additive_entropy_of_positive(quot))
    h_x = float(additive_entropy_of_positive(p))
    for d in (p, prod, quot):
        ctx.h(d)
    elog = expected_log(p)
    return Outcome([
        Part("product", h_prod, 2 * h_quot - h_x + 3 * elog),
        Part("quotient", h_quot, 2 * h_prod - h_x - 3 * elog),
    ], {"h(XY)": h_prod, "h(X/Y)": h_quot, "h(X)": h_x, "E log X": elog})


@register("circle_ratio", "Sum-difference ratio on the circle", domain="circle")
def circle_ratio(ctx, p: CircleDensity):
    if not isinstance(p, CircleDensity):
        raise PreconditionError("needs a CircleDensity")
    d0 = -ctx.h(p)
    dp = -ctx.h(ctx.conv(p, p, 1))
    dm = -ctx.h(ctx.conv(p, p, -1))
    parts, skip = _ratio_parts(d0 - dp, d0 - dm, 0.5, 2.0, "D(T)-D(T-T')")
    return Outcome(parts or [], {"D": d0, "D_sum": dp, "D_diff": dm}, skipped=skip)


@register("complex_pair", "Sum-difference bounds on the nonzero complex numbers", domain="complex")
def complex_pair(ctx, z: ComplexDensity):
    if not isinstance(z, ComplexDensity):
        raise PreconditionError("needs a ComplexDensity")
    prod, quot = ctx.conv(z, z, 1), ctx.conv(z, z, -1)
    for d in (z, prod, quot):
        ctx.h(d)
    h_prod = float(complex_additive_entropy(prod))
    h_quot = float(complex_additive_entropy(quot))
    h_z = float(complex_additive_entropy(z))
    elog = expected_log_modulus(z)
    return Outcome([
        Part("product", h_prod, 2 * h_quot - h_z + 6 * elog),
        Part("quotient", h_quot, 2 * h_prod - h_z - 6 * elog),
    ], {"E log|Z|": elog})


# ---------------------------------------------------------------------------
# R^n densities
# ---------------------------------------------------------------------------

@register("epi_lower", "Entropy-power lower bound on self-divergence", domain="density")
def epi_lower(ctx, p):
    _require_density(p)
    n = dimension_of(p)
    bound = 0.5 * n * LOG2
    return Outcome([Part("d(X||X)", bound, ctx.dR(p, p)),
                    Part("d(X||-X)", bound, ctx.dR(p, _neg(p)))])


@register("ball_nguyen", "Entropy jump and Poincare constant stability bound", domain="density")
def ball_nguyen(ctx, p, c: float, assume_log_concave: bool = False):
    _require_log_concave(p, assume_log_concave)
    c = float(c)
    if not c > 0:
        raise PreconditionError("Poincare constant must be positive")
    sp, _sm, hx, hp, n = _sigmas(ctx, p)
    D = _gauss_D(ctx, p)
    jump = hp - 0.5 * n * LOG2 - hx  # h((X1+X2)/sqrt 2) - h(X)
    return Outcome([
        Part("corollary", D / n, 2 * (1 + c) / c * math.log(sp)),
        Part("entropy-jump", c / (4 * (1 + c)) * D, jump),
    ], {"D": D, "sigma_plus": sp})


@register("gauss_distance", "Non-Gaussianity from doubling and difference constants", domain="density")
def gauss_distance(ctx, p):
    _require_density(p)
    sp, sm, _hx, _hp, n = _sigmas(ctx, p)
    D = _gauss_D(ctx, p)
    return Outcome([Part("gauss-distance", 0.25 * abs(math.log(sp) - math.log(sm)), D / n)],
                   {"D": D, "sigma_plus": sp, "sigma_minus": sm})


@register("cover_zhang", "Sum of equal log-concave marginals versus doubling", domain="density")
def cover_zhang(ctx, p, coupling=None, assume_log_concave: bool = False):
    _require_log_concave(p, assume_log_concave)
    if isinstance(p, ParametricDensity):
        p = p.to_grid(ctx.cells)
    if p.dim != 1:
        raise PreconditionError("couplings are supported for 1-D grids")
    f = p.masses
    n = f.size
    P = np.outer(f, f) if coupling is None else np.asarray(coupling, dtype=float)
    if P.shape != (n, n):
        raise ValidationError(f"coupling shape {P.shape}, expected {(n, n)}")
    if (np.abs(P.sum(axis=1) - f).max() > 1e-10 or np.abs(P.sum(axis=0) - f).max() > 1e-10
            or P.min() < 0):
        raise ValidationError("coupling marginals do not match the density")
    i, j = np.indices(P.shape)
    r = np.bincount((i + j).ravel(), weights=P.ravel(), minlength=2 * n - 1)
    s = GridDensity._raw((2 * p.lo[0],), (2 * p.lo[0] + 2 * n * p.spacing[0],), _cell_average(r))
    return Outcome([Part("dependent-sum", ctx.h(s), ctx.h(p) + LOG2)])


@register("reverse_epi_iid", "Reverse entropy power inequality for i.i.d. log-concave", domain="density")
def reverse_epi_iid(ctx, p, assume_log_concave: bool = False):
    _require_log_concave(p, assume_log_concave)
    n = dimension_of(p)
    sp = 0.5 * math.exp(2.0 * (ctx.h(ctx.conv(p, p, 1)) - ctx.h(p)) / n)
    return Outcome([Part("sigma+", sp, 2.0)], {"sigma_plus": sp})


@register("rogers_shephard_entropy", "Entropic Rogers-Shephard inequality", domain="density")
def rogers_shephard_entropy(ctx, p, assume_log_concave: bool = False):
    _require_log_concave(p, assume_log_concave)
    n = dimension_of(p)
    sm = 0.5 * math.exp(2.0 * (ctx.h(ctx.conv(p, p, -1)) - ctx.h(p)) / n)
    return Outcome([Part("sigma-", sm, 8.0)], {"sigma_minus": sm})


@register("ruzsa_div_ub", "Upper bounds on Ruzsa divergence for log-concave", domain="density")
def ruzsa_div_ub(ctx, p, assume_log_concave: bool = False):
    _require_log_concave(p, assume_log_concave)
    n = dimension_of(p)
    return Outcome([Part("d(X||X)", ctx.dR(p, p), 2 * n * LOG2),
                    Part("d(X||-X)", ctx.dR(p, _neg(p)), n * LOG2)])


@register("conjecture_sd", "Conjectured sharp difference constant in one dimension",
          status=CONJECTURE, domain="density")
def conjecture_sd(ctx, p, assume_log_concave: bool = False):
    _require_log_concave(p, assume_log_concave)
    if dimension_of(p) != 1:
        raise PreconditionError("the conjecture concerns one-dimensional variables")
    sm = 0.5 * math.exp(2.0 * (ctx.h(ctx.conv(p, p, -1)) - ctx.h(p)))
    return Outcome([Part("sigma-", sm, 2.0)], {"sigma_minus": sm})


# ---------------------------------------------------------------------------
# determinants
# ---------------------------------------------------------------------------

def _det_scale(*vals) -> float:
    return max(1.0, *(abs(v) for v in vals))


@register("det_minkowski", "Minkowski determinant inequality", domain="matrix")
def det_minkowski(ctx, A, B):
    A, B = as_pd_matrix(A), as_pd_matrix(B)
    n = A.shape[0]
    lhs = np.linalg.det(A) ** (1 / n) + np.linalg.det(B) ** (1 / n)
    rhs = np.linalg.det(A + B) ** (1 / n)
    return Outcome([Part("minkowski", lhs, rhs)], scale=_det_scale(lhs, rhs))


@register("det_rotfeld", "Rotfel'd determinant inequality", domain="matrix")
def det_rotfeld(ctx, A, B):
    A, B = as_pd_matrix(A), as_pd_matrix(B)
    I = np.eye(A.shape[0])
    lhs = np.linalg.det(I + A + B)
    rhs = np.linalg.det(I + A) * np.linalg.det(I + B)
    return Outcome([Part("rotfeld", lhs, rhs)], scale=_det_scale(lhs, rhs))


def det_sum_gaussian_route(K, Ks) -> tuple[float, float]:
    """Both sides of the determinant-sum inequality via Gaussian entropies.

    d_R(N(0,K) || N(0,K_j)) = 1/2 log det(K + K_j) / det K, so exponentiating
    the Plunnecke-Ruzsa sides recovers determinants.
    """
    from ..convolve import convolve
    from ..entropy import entropy
    X = ParametricDensity.gaussian(np.zeros(len(K)), K)
    hx = float(entropy(X))
    Ys = [ParametricDensity.gaussian(np.zeros(len(K)), Kj) for Kj in Ks]
    total = Ys[0]
    for Y in Ys[1:]:
        total = convolve(total, Y)
    d_lhs = float(entropy(convolve(X, total, -1))) - hx
    d_rhs = sum(float(entropy(convolve(X, Y, -1))) - hx for Y in Ys)
    det_k = math.exp(2 * hx - len(K) * LOG_2PI_E)
    return det_k * math.exp(2 * d_lhs), det_k * math.exp(2 * d_rhs)


@register("det_sum", "Determinant inequality for sums of positive-definite matrices", domain="matrix")
def det_sum(ctx, K, *Ks):
    if not Ks:
        raise PreconditionError("needs at least one K_j")
    K = as_pd_matrix(K)
    Ks = [as_pd_matrix(Kj) for Kj in Ks]
    if any(Kj.shape != K.shape for Kj in Ks):
        raise ValidationError("matrices must share a dimension")
    k = len(Ks)
    lhs = np.linalg.det(K + sum(Ks))
    rhs = np.linalg.det(K) ** (-(k - 1)) * math.prod(np.linalg.det(K + Kj) for Kj in Ks)
    g_lhs, g_rhs = det_sum_gaussian_route(K, Ks)
    rel = max(abs(g_lhs - lhs) / abs(lhs), abs(g_rhs - rhs) / abs(rhs))
    return Outcome([Part("det-sum", lhs, rhs)],
                   {"gaussian_route": [g_lhs, g_rhs], "gaussian_route_rel_err": rel},
                   scale=_det_scale(lhs, rhs))
