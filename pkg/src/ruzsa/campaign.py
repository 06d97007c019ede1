"""Verification campaigns: a JSON list of checks with their input sources.

A campaign file looks like::

    {
      "version": 1,
      "seed": 0,
      "tolerance": null,
      "cells": 4096,
      "entries": [
        {"check": "ruzsa_triangle",
         "inputs": [{"example": "z8-skewed"}, {"file": "p.json"}, {"example": "z8-uniform"}]},
        {"check": "subadditivity", "generator": "finite", "trials": 20},
        {"check": "weighted_sum_lemma",
         "inputs": [{"example": "z8-skewed"}, {"example": "z8-uniform"}, 2, 3],
         "params": {"left": "aX+bX'"}, "tolerance": 1e-9}
      ],
      "output": "report.json"
    }

An input source is ``{"file": path}`` (relative to the campaign file),
``{"example": name}`` (see ``EXAMPLES``), an inline encoded value such as
``{"type": "finite", ...}``, or a plain number.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Callable

import numpy as np

from .checks import GENERATORS, check, get_check
from .checks.result import CheckResult
from .density import (
    CircleDensity,
    ComplexDensity,
    FinitePMF,
    JointPMF,
    ParametricDensity,
    PositiveDensity,
    markov_triple,
)
from .errors import RuzsaError, ValidationError
from .groups import GroupSpec
from .io import decode_value, read_density

CAMPAIGN_VERSION = 1


# ---------------------------------------------------------------------------
# named examples
# ---------------------------------------------------------------------------

def _z(m):
    return GroupSpec.cyclic(m)


def _z2_joint():
    return JointPMF([_z(2), _z(2)], [[0.4, 0.1], [0.1, 0.4]])


def _z3_joint():
    return JointPMF([_z(3), _z(3)], [[0.3, 0.05, 0.05], [0.05, 0.2, 0.05], [0.1, 0.05, 0.15]])


def _complex_example():
    r = ParametricDensity.gaussian(0.0, 0.25).to_grid(256)
    return ComplexDensity.from_parts(r, CircleDensity.wrapped_gaussian(1.0, 0.6, 128))


EXAMPLES: dict[str, Callable[[], object]] = {
    "z4-uniform01": lambda: FinitePMF.uniform_on(_z(4), [0, 1]),
    "z8-uniform": lambda: FinitePMF.uniform(_z(8)),
    "z8-skewed": lambda: FinitePMF(_z(8), [0.3, 0.2, 0.15, 0.1, 0.1, 0.08, 0.05, 0.02]),
    "z8-sparse": lambda: FinitePMF(_z(8), [0.5, 0, 0, 0.25, 0, 0.25, 0, 0]),
    "z8-point": lambda: FinitePMF.point_mass(_z(8), 3),
    "z12-peaked": lambda: FinitePMF._raw(_z(12), np.exp(-0.5 * (np.arange(12) - 5.0) ** 2)),
    "z3-peaked": lambda: FinitePMF(_z(3), [0.6, 0.3, 0.1]),
    "z2-joint": _z2_joint,
    "z3-joint": _z3_joint,
    "z3-markov": lambda: markov_triple(_z3_joint()),
    "gaussian": lambda: ParametricDensity.gaussian(0.0, 1.0),
    "gaussian-grid": lambda: ParametricDensity.gaussian(0.0, 1.0).to_grid(4096, box=([-8.0], [8.0])),
    "exponential": lambda: ParametricDensity.exponential(1.0),
    "exponential-grid": lambda: ParametricDensity.exponential(1.0).to_grid(4096),
    "uniform": lambda: ParametricDensity.uniform(0.0, 1.0),
    "uniform-grid": lambda: ParametricDensity.uniform(0.0, 1.0).to_grid(4096),
    "laplace": lambda: ParametricDensity.laplace(1.0),
    "gamma3": lambda: ParametricDensity.gamma(3.0, 1.0),
    "gaussian-2d": lambda: ParametricDensity.gaussian([0.0, 0.0], [[1.0, 0.5], [0.5, 2.0]]),
    "lognormal": lambda: PositiveDensity.lognormal(0.0, 1.0),
    "wrapped-gaussian": lambda: CircleDensity.wrapped_gaussian(0.5, 0.7, 1024),
    "complex-example": _complex_example,
    "identity-2": lambda: np.eye(2),
    "pd-3a": lambda: np.array([[2.0, 0.5, 0.1], [0.5, 1.0, 0.2], [0.1, 0.2, 3.0]]),
    "pd-3b": lambda: np.array([[1.0, -0.3, 0.0], [-0.3, 2.0, 0.4], [0.0, 0.4, 0.5]]),
    "pd-3c": lambda: np.diag([0.5, 1.5, 2.5]),
    "z12": lambda: _z(12),
    "set-a": lambda: frozenset({0, 1, 2, 5}),
    "set-b": lambda: frozenset({0, 3, 7}),
    "set-c": lambda: frozenset({1, 4, 6, 10, 11}),
}


@lru_cache(maxsize=None)
def example(name: str):
    """Build a named example input (cached; treat the result as read-only)."""
    try:
        return EXAMPLES[name]()
    except KeyError:
        raise ValidationError(f"unknown example {name!r}") from None


def _E(name):
    return {"example": name}


# one representative instance per registered check
THEOREM_SUITE = [
    {"check": "ruzsa_triangle", "inputs": [_E("z8-skewed"), _E("z8-sparse"), _E("z8-uniform")]},
    {"check": "ruzsa_triangle", "inputs": [_E("gaussian"), _E("exponential"), _E("laplace")]},
    {"check": "ruzsa_triangle_sharp", "inputs": [_E("z8-skewed"), _E("z8-sparse"), _E("z8-point")]},
    {"check": "subadditivity", "inputs": [_E("z8-skewed"), _E("z8-sparse"), _E("z8-skewed")]},
    {"check": "monotonicity", "inputs": [_E("z8-skewed"), _E("z8-sparse"), _E("z8-uniform")]},
    {"check": "plunnecke_ruzsa", "inputs": [_E("z12-peaked"), _E("z12-peaked"), _E("z12-peaked")]},
    {"check": "submodularity", "inputs": [_E("z8-skewed"), _E("z8-sparse"), _E("z8-skewed")]},
    {"check": "cond_reduces", "inputs": [_E("z3-peaked"), _E("z3-joint")]},
    {"check": "cond_ruzsa_bound", "inputs": [_E("z3-markov")]},
    {"check": "cond_ruzsa_symmetric", "inputs": [_E("z3-joint")]},
    {"check": "bsg", "inputs": [_E("z2-joint")]},
    {"check": "sum_difference", "inputs": [_E("z8-skewed"), _E("z8-sparse")]},
    {"check": "doubling_difference_ratio", "inputs": [_E("gaussian")]},
    {"check": "doubling_difference_ratio", "inputs": [_E("exponential-grid")]},
    {"check": "weighted_sum_lemma", "inputs": [_E("z12-peaked"), _E("z12-peaked"), 2, 3]},
    {"check": "weighted_sum_theorem", "inputs": [_E("z12-peaked"), _E("z12-peaked"), 3, 5]},
    {"check": "multiplicative_pair", "inputs": [_E("lognormal")]},
    {"check": "circle_ratio", "inputs": [_E("wrapped-gaussian")]},
    {"check": "complex_pair", "inputs": [_E("complex-example")]},
    {"check": "epi_lower", "inputs": [_E("gaussian-2d")]},
    {"check": "ball_nguyen", "inputs": [_E("exponential"), 0.25]},
    {"check": "gauss_distance", "inputs": [_E("exponential-grid")]},
    {"check": "cover_zhang", "inputs": [_E("gamma3")]},
    {"check": "reverse_epi_iid", "inputs": [_E("exponential")]},
    {"check": "rogers_shephard_entropy", "inputs": [_E("exponential")]},
    {"check": "ruzsa_div_ub", "inputs": [_E("exponential")]},
    {"check": "conjecture_sd", "inputs": [_E("uniform")]},
    {"check": "det_minkowski", "inputs": [_E("pd-3a"), _E("pd-3b")]},
    {"check": "det_rotfeld", "inputs": [_E("pd-3a"), _E("pd-3b")]},
    {"check": "det_sum", "inputs": [_E("identity-2"), _E("identity-2"), _E("identity-2")]},
    {"check": "det_sum", "inputs": [_E("pd-3a"), _E("pd-3b"), _E("pd-3c")]},
    {"check": "sumset_triangle", "inputs": [_E("set-a"), _E("set-b"), _E("set-c"), _E("z12")]},
    {"check": "discrete_sd_ratio", "inputs": [_E("z12-peaked")]},
]

BUILTIN_CAMPAIGNS = {
    "paper-suite": {"version": CAMPAIGN_VERSION, "seed": 0, "entries": THEOREM_SUITE},
}


# ---------------------------------------------------------------------------
# campaign model
# ---------------------------------------------------------------------------

@dataclass
class Entry:
    check: str
    inputs: list = field(default_factory=list)
    params: dict = field(default_factory=dict)
    tolerance: float | None = None
    generator: str | None = None
    trials: int = 0
    gen_opts: dict = field(default_factory=dict)


@dataclass
class Campaign:
    entries: list[Entry]
    seed: int = 0
    tolerance: float | None = None
    cells: int = 4096
    output: str | None = None
    name: str = "campaign"
    base_dir: Path = field(default_factory=Path.cwd)


def _parse_entry(i: int, raw) -> Entry:
    if not isinstance(raw, dict) or "check" not in raw:
        raise ValidationError(f"entry {i}: must be an object with a 'check' field")
    get_check(raw["check"])
    e = Entry(check=raw["check"], inputs=list(raw.get("inputs", [])),
              params=dict(raw.get("params", {})), tolerance=raw.get("tolerance"),
              generator=raw.get("generator"), trials=int(raw.get("trials", 0)),
              gen_opts=dict(raw.get("gen_opts", {})))
    if e.generator is not None:
        if e.generator not in GENERATORS:
            raise ValidationError(f"entry {i}: unknown generator {e.generator!r}")
        if e.trials < 1:
            raise ValidationError(f"entry {i}: generator entries need trials >= 1")
        if e.inputs:
            raise ValidationError(f"entry {i}: give either inputs or a generator, not both")
    return e


def parse_campaign(obj, *, name: str = "campaign", base_dir: Path | None = None) -> Campaign:
    if not isinstance(obj, dict):
        raise ValidationError("campaign must be a JSON object")
    if obj.get("version", CAMPAIGN_VERSION) != CAMPAIGN_VERSION:
        raise ValidationError(f"unsupported campaign version {obj.get('version')}")
    entries = obj.get("entries", [])
    if not isinstance(entries, list):
        raise ValidationError("'entries' must be a list")
    try:
        seed = int(obj.get("seed", 0))
        cells = int(obj.get("cells", 4096))
        tol = obj.get("tolerance")
        tol = None if tol is None else float(tol)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"bad campaign setting: {exc}") from None
    return Campaign([_parse_entry(i, e) for i, e in enumerate(entries)], seed=seed,
                    tolerance=tol, cells=cells, output=obj.get("output"), name=name,
                    base_dir=base_dir or Path.cwd())


def load_campaign(source: str) -> Campaign:
    """Read a campaign file, or a built-in campaign by name."""
    if source in BUILTIN_CAMPAIGNS:
        return parse_campaign(BUILTIN_CAMPAIGNS[source], name=source)
    path = Path(source)
    try:
        obj = json.loads(path.read_text())
    except FileNotFoundError:
        raise ValidationError(f"{path}: no such campaign file or built-in campaign") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: not valid JSON ({exc})") from None
    try:
        return parse_campaign(obj, name=path.stem, base_dir=path.parent)
    except RuzsaError as exc:
        raise type(exc)(f"{path}: {exc}") from None


def resolve_input(src, base_dir: Path):
    """Turn an input source into a check argument."""
    if isinstance(src, dict) and "file" in src:
        path = Path(src["file"])
        return read_density(path if path.is_absolute() else base_dir / path)
    if isinstance(src, dict) and "example" in src:
        return example(src["example"])
    return decode_value(src)


def run_campaign(c: Campaign, *, tolerance: float | None = None, seed: int | None = None,
                 trials: int | None = None) -> list[CheckResult]:
    """Evaluate every entry; generator entries expand to one result per trial.

    Trial ``t`` of entry ``i`` draws from child ``t`` of ``SeedSequence([seed, i])``,
    so a campaign replayed with the same seed reproduces every result.
    """
    seed = c.seed if seed is None else seed
    tol_global = c.tolerance if tolerance is None else tolerance
    results = []
    for i, e in enumerate(c.entries):
        tol = e.tolerance if e.tolerance is not None else tol_global
        if e.generator is None:
            r = check(e.check, *[resolve_input(s, c.base_dir) for s in e.inputs], tolerance=tol, cells=c.cells, **e.params)
            r.metadata["entry"] = i
            results.append(r)
            continue
        n = trials if trials is not None else e.trials
        make = GENERATORS[e.generator]
        for t, ss in enumerate(np.random.SeedSequence([seed, i]).spawn(n)):
            args, kw = make(e.check, np.random.default_rng(ss), **e.gen_opts)
            r = check(e.check, *args, tolerance=tol, cells=c.cells, **{**kw, **e.params})
            r.metadata.update(entry=i, trial=t, generator=e.generator)
            results.append(r)
    return results
