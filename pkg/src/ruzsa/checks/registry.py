"""Named inequality checks and the runner that turns them into CheckResults."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..density import (
    DEFAULT_CELLS,
    CircleDensity,
    ComplexDensity,
    GridDensity,
    PositiveDensity,
)
from ..entropy import GRID
from ..errors import TheoremViolation, UnknownCheckError
from ..metrics import digest_of
from .result import (
    CONJECTURE,
    FAIL,
    OBSERVATIONAL,
    PASS,
    SKIPPED,
    THEOREM,
    CheckResult,
    Context,
    Outcome,
)


@dataclass(frozen=True)
class CheckSpec:
    name: str
    fn: Callable
    reference: str
    status: str = THEOREM
    domain: str = "any"  # finite | density | matrix | set | any

    @property
    def is_theorem(self) -> bool:
        return self.status == THEOREM


REGISTRY: dict[str, CheckSpec] = {}


def register(name: str, reference: str, status: str = THEOREM, domain: str = "any"):
    def deco(fn):
        if name in REGISTRY:
            raise ValueError(f"duplicate check {name}")
        REGISTRY[name] = CheckSpec(name, fn, reference, status, domain)
        return fn
    return deco


def get_check(name: str) -> CheckSpec:
    try:
        return REGISTRY[name]
    except KeyError:
        raise UnknownCheckError(f"unknown check {name!r}; known: {', '.join(sorted(REGISTRY))}") from None


CHECK_ORDER = (
    "ruzsa_triangle", "ruzsa_triangle_sharp", "subadditivity", "monotonicity",
    "plunnecke_ruzsa", "submodularity", "cond_reduces", "cond_ruzsa_bound",
    "cond_ruzsa_symmetric", "bsg", "sum_difference", "doubling_difference_ratio",
    "weighted_sum_lemma", "weighted_sum_theorem", "multiplicative_pair", "circle_ratio",
    "complex_pair", "epi_lower", "ball_nguyen", "gauss_distance", "cover_zhang",
    "reverse_epi_iid", "rogers_shephard_entropy", "ruzsa_div_ub", "conjecture_sd",
    "det_minkowski", "det_rotfeld", "det_sum", "sumset_triangle", "discrete_sd_ratio",
)


def list_checks() -> list[str]:
    """Registered check names in their canonical order."""
    known = [n for n in CHECK_ORDER if n in REGISTRY]
    return known + [n for n in REGISTRY if n not in CHECK_ORDER]


def _refine(obj):
    if isinstance(obj, GridDensity):
        return obj.refined(2)
    if isinstance(obj, CircleDensity):
        return CircleDensity._raw(np.repeat(obj.masses, 2) / 2)
    if isinstance(obj, ComplexDensity):
        return ComplexDensity._raw(obj.lo, obj.hi, np.repeat(np.repeat(obj.masses, 2, 0), 2, 1) / 4)
    if isinstance(obj, PositiveDensity) and isinstance(obj.log_density, GridDensity):
        return PositiveDensity(obj.log_density.refined(2))
    return obj


def _evaluate(spec: CheckSpec, inputs, params, cells, tolerance):
    ctx = Context(cells=cells)
    out: Outcome = spec.fn(ctx, *inputs, **params)
    tol = (ctx.tolerance if tolerance is None else tolerance) * out.scale
    return ctx, out, tol


def check(name: str, *inputs, tolerance: float | None = None, strict: bool = False,
          retry: bool = True, cells: int = DEFAULT_CELLS, **params) -> CheckResult:
    """Evaluate a registered check on the given inputs.

    Multi-part checks report their binding (smallest-slack) part. A grid-based
    theorem check that misses its tolerance is re-run once at twice the
    resolution before being reported as FAIL; ``strict`` turns a FAIL into a
    raised ``TheoremViolation``.
    """
    spec = get_check(name)
    digest = digest_of(list(inputs), sorted((k, repr(v)) for k, v in params.items()))
    ctx, out, tol = _evaluate(spec, inputs, params, cells, tolerance)
    meta = dict(out.metadata)
    meta["representation"] = ctx.rep
    if ctx.truncated:
        meta["truncated_mass"] = ctx.truncated
    if out.skipped is not None:
        meta["skip_reason"] = out.skipped
        return CheckResult(name, math.nan, math.nan, math.nan, True, tol, SKIPPED,
                           digest, spec.reference, meta)
    part = min(out.parts, key=lambda p: p.slack)
    passed = part.slack >= -tol
    if not passed and retry and ctx.rep == GRID and spec.is_theorem:
        refined = [_refine(x) for x in inputs]
        ctx2, out2, tol2 = _evaluate(spec, refined, params, 2 * cells, tolerance)
        part2 = min(out2.parts, key=lambda p: p.slack)
        meta["retry"] = {"first_slack": part.slack, "refined_slack": part2.slack}
        part, out, tol = part2, out2, tol2
        passed = part.slack >= -tol
    meta["binding_part"] = part.label
    if len(out.parts) > 1:
        meta["parts"] = {p.label: {"lhs": p.lhs, "rhs": p.rhs, "slack": p.slack} for p in out.parts}
    if spec.status == CONJECTURE:
        status = CONJECTURE
    elif spec.status == OBSERVATIONAL:
        status = OBSERVATIONAL
    else:
        status = PASS if passed else FAIL
    result = CheckResult(name, part.lhs, part.rhs, part.slack, passed, tol, status,
                         digest, spec.reference, meta)
    if strict and status == FAIL:
        raise TheoremViolation(result)
    return result
