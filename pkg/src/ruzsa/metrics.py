"""Ruzsa divergence, conditional divergence, Ruzsa difference and the
doubling / difference constants."""
from __future__ import annotations

import hashlib
import math
from typing import Sequence

import numpy as np

from . import kernels
from .convolve import convolve
from .density import FinitePMF, GridDensity, JointPMF, ParametricDensity
from .entropy import (
    CLOSED_FORM,
    EXACT,
    GRID,
    EntropyValue,
    _weaker,
    dimension_of,
    entropy,
    mutual_information,
)
from .errors import (
    DegenerateDistributionError,
    GroupMismatchError,
    MarkovViolationError,
    ValidationError,
)

IDENTITY_TOL = 1e-10
MARKOV_TOL = 1e-10
SIGMA_CROSS_RTOL = 1e-8

DIVERGENCE = "divergence"
CONDITIONAL = "conditional"
DIFFERENCE = "difference"
DOUBLING = "doubling-constant"
DIFFERENCE_CONSTANT = "difference-constant"


class RuzsaValue(float):
    """A divergence-type value (nats) or sigma constant, tagged with its kind
    and representation."""

    kind: str
    representation: str
    digest: str

    def __new__(cls, value, kind, representation, digest=""):
        obj = super().__new__(cls, value)
        obj.kind, obj.representation, obj.digest = kind, representation, digest
        return obj

    def __repr__(self):
        return f"RuzsaValue({float(self)!r}, {self.kind}, {self.representation})"


def digest_of(*objs) -> str:
    """Stable sha256 over the numeric content of distributions and arrays."""
    h = hashlib.sha256()
    for o in objs:
        _feed(h, o)
    return h.hexdigest()


def _feed(h, o):
    if isinstance(o, FinitePMF):
        h.update(b"F" + repr(o.group.moduli).encode() + o.probs.tobytes())
    elif isinstance(o, JointPMF):
        h.update(b"J" + repr([g.moduli for g in o.groups]).encode() + o.tensor.tobytes())
    elif isinstance(o, GridDensity):
        h.update(b"G" + repr((o.lo, o.hi)).encode() + np.ascontiguousarray(o.masses).tobytes())
    elif isinstance(o, ParametricDensity):
        h.update(b"P" + o.family.encode())
        for k in sorted(o.params):
            h.update(k.encode() + np.ascontiguousarray(o.params[k]).tobytes())
    elif isinstance(o, np.ndarray):
        h.update(b"A" + repr(o.shape).encode() + np.ascontiguousarray(o, dtype=float).tobytes())
    elif isinstance(o, (list, tuple)):
        h.update(b"L")
        for x in o:
            _feed(h, x)
    elif isinstance(o, (frozenset, set)):
        h.update(b"S" + repr(sorted(o, key=repr)).encode())
    elif hasattr(o, "masses"):
        h.update(type(o).__name__.encode() + np.ascontiguousarray(o.masses).tobytes())
        for attr in ("lo", "hi"):
            if hasattr(o, attr):
                h.update(repr(getattr(o, attr)).encode())
    elif hasattr(o, "log_density"):
        h.update(b"+")
        _feed(h, o.log_density)
    else:
        h.update(repr(o).encode())


def _finite_entropy(h: EntropyValue, what: str) -> EntropyValue:
    if math.isinf(h) or math.isnan(h):
        raise DegenerateDistributionError(f"{what} has no finite entropy")
    return h


# ---------------------------------------------------------------------------
# unconditional
# ---------------------------------------------------------------------------

def _difference_joint_mi(p: FinitePMF, q: FinitePMF) -> float:
    """I(X' - Y'; Y') from the explicit joint of (X' - Y', Y')."""
    g = p.group
    n = g.order
    ys = np.arange(n)
    zs = np.arange(n)
    # x = z + y
    xi = g.combine_indices([(1, zs[:, None]), (1, ys[None, :])])
    t = p.probs[xi] * q.probs[None, :]
    hz = kernels.entropy_nats(t.sum(axis=1))
    hy = kernels.entropy_nats(t.sum(axis=0))
    return hz + hy - kernels.entropy_nats(t)


def ruzsa_divergence(p, q, *, verify: bool = True, **conv_kw) -> RuzsaValue:
    """d_R(X || Y) = h(X' - Y') - h(X') for independent copies."""
    hx = _finite_entropy(entropy(p), "X")
    hd = _finite_entropy(entropy(convolve(p, q, -1, **conv_kw)), "X' - Y'")
    val = float(hd) - float(hx)
    if verify and isinstance(p, FinitePMF):
        if p.group != q.group:
            raise GroupMismatchError(f"{p.group} vs {q.group}")
        mi = _difference_joint_mi(p, q)
        if abs(mi - val) > IDENTITY_TOL:
            raise ValidationError(f"divergence {val} disagrees with I(X'-Y';Y') = {mi}")
    return RuzsaValue(val, DIVERGENCE, _weaker(hx.representation, hd.representation))


# ---------------------------------------------------------------------------
# finite joints: laws of linear combinations without materialising new axes
# ---------------------------------------------------------------------------

def _combo_with(joint: JointPMF, coeffs: dict[int, int], keep: Sequence[int]) -> np.ndarray:
    """Joint tensor of (sum_j c_j X_j, X_keep...) on a shared group."""
    g = joint.groups[next(iter(coeffs))]
    for j in coeffs:
        if joint.groups[j] != g:
            raise GroupMismatchError("combined variables must share a group")
    shape = joint.tensor.shape
    grids = np.indices(shape).reshape(len(shape), -1)
    comb = g.combine_indices([(c, grids[j]) for j, c in coeffs.items()])
    flat = comb
    out_shape = [g.order]
    for k in keep:
        flat = flat * shape[k] + grids[k]
        out_shape.append(shape[k])
    size = math.prod(out_shape)
    return np.bincount(flat, weights=joint.tensor.ravel(), minlength=size).reshape(out_shape)


def _H(t: np.ndarray) -> float:
    return kernels.entropy_nats(t)


def markov_gap(joint: JointPMF, a: int, b: int, given: Sequence[int]) -> float:
    """I(X_a; X_b | X_given)."""
    from .entropy import conditional_mutual_information
    return float(conditional_mutual_information(joint, a, b, tuple(given)))


def conditional_ruzsa_divergence(joint: JointPMF, a: int = 0, b: int = 2,
                                 given: Sequence[int] = (1,), *,
                                 markov_tol: float = MARKOV_TOL) -> RuzsaValue:
    """d_R(X_a || X_b | X_given) = h(X_a - X_b | given) - h(X_a | given).

    Requires X_a <-> given <-> X_b to be Markov; also asserts the value equals
    I(X_a - X_b; X_b | given).
    """
    given = tuple(int(i) for i in (given if not isinstance(given, int) else (given,)))
    gap = markov_gap(joint, a, b, given)
    if gap > markov_tol:
        raise MarkovViolationError(f"I(X_{a}; X_{b} | X_{list(given)}) = {gap:.3e} > {markov_tol}")
    hg = _H(joint.marginal_tensor(given))
    h_diff_g = _H(_combo_with(joint, {a: 1, b: -1}, given))
    h_a_g = _H(joint.marginal_tensor((a,) + given))
    val = (h_diff_g - hg) - (h_a_g - hg)
    # I(D; X_b | G) = H(D,G) + H(X_b,G) - H(D,X_b,G) - H(G)
    h_b_g = _H(joint.marginal_tensor((b,) + given))
    h_d_b_g = _H(_combo_with(joint, {a: 1, b: -1}, (b,) + given))
    cmi = h_diff_g + h_b_g - h_d_b_g - hg
    if abs(cmi - val) > IDENTITY_TOL:
        raise ValidationError(f"conditional divergence {val} disagrees with I(.;.|.) = {cmi}")
    return RuzsaValue(val, CONDITIONAL, EXACT)


def ruzsa_difference(joint: JointPMF, a: int = 0, b: int = 1) -> RuzsaValue:
    """h(X - Y) - h(X) for possibly dependent (X, Y); may be negative."""
    ha = _H(joint.marginal_tensor((a,)))
    hb = _H(joint.marginal_tensor((b,)))
    hd = _H(_combo_with(joint, {a: 1, b: -1}, ()))
    val = hd - ha
    # I(X - Y; Y) - I(X; Y)
    hdb = _H(_combo_with(joint, {a: 1, b: -1}, (b,)))
    hab = _H(joint.marginal_tensor((a, b)))
    ident = (hd + hb - hdb) - (ha + hb - hab)
    if abs(ident - val) > IDENTITY_TOL:
        raise ValidationError(f"Ruzsa difference {val} disagrees with MI identity {ident}")
    return RuzsaValue(val, DIFFERENCE, EXACT)


def combination_entropy(joint: JointPMF, coeffs: dict[int, int], given: Sequence[int] = ()) -> float:
    """H(sum_j c_j X_j | X_given)."""
    given = tuple(given)
    t = _combo_with(joint, coeffs, given)
    return _H(t) - (_H(joint.marginal_tensor(given)) if given else 0.0)


# ---------------------------------------------------------------------------
# doubling and difference constants
# ---------------------------------------------------------------------------

def _sigma(p, sign: int, dim: int | None, **conv_kw) -> tuple[float, str]:
    if isinstance(p, (FinitePMF, JointPMF)):
        raise ValidationError("doubling/difference constants are defined for densities on R^n")
    n = dim if dim is not None else dimension_of(p)
    hx = _finite_entropy(entropy(p), "X")
    hs = _finite_entropy(entropy(convolve(p, p, sign, **conv_kw)), "X +/- X'")
    sigma = 0.5 * math.exp(2.0 * (float(hs) - float(hx)) / n)
    # entropy-power form as a cross-check
    ratio = math.exp(2.0 * float(hs) / n) / (2.0 * math.exp(2.0 * float(hx) / n))
    if not math.isclose(sigma, ratio, rel_tol=SIGMA_CROSS_RTOL):
        raise ValidationError(f"sigma {sigma} disagrees with entropy-power ratio {ratio}")
    return sigma, _weaker(hx.representation, hs.representation)


def doubling_constant(p, dim: int | None = None, **conv_kw) -> RuzsaValue:
    """sigma_+ = N(X + X') / (2 N(X)), tagged with its representation."""
    val, rep = _sigma(p, 1, dim, **conv_kw)
    return RuzsaValue(val, DOUBLING, rep)


def difference_constant(p, dim: int | None = None, **conv_kw) -> RuzsaValue:
    """sigma_- = N(X - X') / (2 N(X)), tagged with its representation."""
    val, rep = _sigma(p, -1, dim, **conv_kw)
    return RuzsaValue(val, DIFFERENCE_CONSTANT, rep)


def sigma_estimate(p, sign: int, dim: int | None = None, **conv_kw) -> tuple[float, float]:
    """(sigma, bias): sigma at the given resolution and its change under 2x refinement.

    Closed-form inputs report zero bias.
    """
    val, rep = _sigma(p, sign, dim, **conv_kw)
    if rep != GRID:
        return val, 0.0
    if isinstance(p, GridDensity):
        fine = _sigma(p.refined(2), sign, dim, **conv_kw)[0]
    else:
        cells = conv_kw.pop("cells", 4096)
        fine = _sigma(p, sign, dim, cells=2 * cells, **conv_kw)[0]
    return val, fine - val
