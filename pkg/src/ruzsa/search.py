"""Numerical search for extremal inputs: maximize sigma_+/- or minimize the
slack of a registered check over a constrained distribution space."""
from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy import optimize as sopt
from scipy.special import softmax

from . import kernels
from .checks import check, get_check
from .density import FinitePMF, ParametricDensity
from .errors import ValidationError
from .generators import concave_knots, logdensity_grid, masses_from_log
from .groups import GroupSpec
from .metrics import _sigma

MAX_SIGMA_MINUS = "max_sigma_minus"
MAX_SIGMA_PLUS = "max_sigma_plus"
MIN_SLACK = "min_slack"
METHODS = ("nelder-mead", "projected-gradient", "simulated-annealing")

FD_STEP = 1e-5
LOG_RANGE = 200.0  # knot values are kept within this distance of the maximum


# ---------------------------------------------------------------------------
# projections
# ---------------------------------------------------------------------------

def project_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the probability simplex (sort-based)."""
    v = np.asarray(v, dtype=float)
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    k = np.arange(1, v.size + 1)
    rho = np.nonzero(u - css / k > 0)[0][-1]
    theta = css[rho] / (rho + 1.0)
    return np.maximum(v - theta, 0.0)


def project_concave(phi: np.ndarray) -> np.ndarray:
    """Closest concave sequence in the sense of isotonic regression of slopes.

    Slopes are replaced by their non-increasing PAV fit; the first value and
    the total rise (hence both endpoints) are preserved.
    """
    phi = np.asarray(phi, dtype=float)
    if phi.size < 3:
        return phi.copy()
    d = kernels.pav_decreasing(np.diff(phi))
    return np.concatenate([[phi[0]], phi[0] + np.cumsum(d)])


def is_concave(phi: np.ndarray, tol: float = 1e-12) -> bool:
    return phi.size < 3 or bool(np.all(np.diff(phi, 2) <= tol))


# ---------------------------------------------------------------------------
# spaces
# ---------------------------------------------------------------------------

class SimplexSpace:
    """k independent pmfs on a finite group, parameterised by softmax logits."""

    kind = "simplex"

    def __init__(self, group: GroupSpec, k: int = 1):
        self.group, self.k = group, k

    @property
    def dim(self) -> int:
        return self.k * self.group.order

    def random_point(self, rng) -> np.ndarray:
        return rng.normal(0.0, 1.0, self.dim)

    def project(self, x):
        return np.asarray(x, dtype=float)

    def to_simplex(self, x) -> np.ndarray:
        return softmax(np.asarray(x).reshape(self.k, -1), axis=1)

    def from_simplex(self, p: np.ndarray) -> np.ndarray:
        return np.log(np.maximum(p, 1e-300)).ravel()

    def propose(self, x, rng, scale):
        # move in the simplex directly, then return to logits
        p = self.to_simplex(x)
        q = np.stack([project_simplex(row + rng.normal(0, scale / row.size, row.size)) for row in p])
        return self.from_simplex(q)

    def decode(self, x, refine: int = 1):
        return [FinitePMF._raw(self.group, row) for row in self.to_simplex(x)]

    def is_feasible(self, x) -> bool:
        return bool(np.all(np.isfinite(x)))


class LogConcaveGridSpace:
    """1-D densities with a piecewise-linear concave log-density through equally spaced knots."""

    kind = "logconcave-grid"

    def __init__(self, knots: int = 64, cells_per_knot: int = 16):
        if knots < 2:
            raise ValidationError("need at least two knots")
        self.knots, self.cells_per_knot = knots, cells_per_knot

    @property
    def dim(self) -> int:
        return self.knots

    def random_point(self, rng) -> np.ndarray:
        return concave_knots(self.knots, rng)

    def project(self, x):
        phi = project_concave(np.asarray(x, dtype=float))
        return np.maximum(phi - phi.max(), -LOG_RANGE)

    def propose(self, x, rng, scale):
        return self.project(x + rng.normal(0.0, scale, x.size))

    def decode(self, x, refine: int = 1):
        return [logdensity_grid(self.project(x), self.cells_per_knot * refine)]

    def is_feasible(self, x) -> bool:
        return is_concave(self.project(x)) and bool(np.all(np.isfinite(x)))


class ParametricSpace:
    """Parameters of one family inside a box (e.g. gamma shape in [1, 20])."""

    kind = "parametric"

    def __init__(self, family: str = "gamma", bounds: dict | None = None):
        self.family = family
        self.bounds = bounds or {"shape": (1.0, 20.0)}
        self.names = list(self.bounds)

    @property
    def dim(self) -> int:
        return len(self.names)

    def random_point(self, rng) -> np.ndarray:
        return np.array([rng.uniform(*self.bounds[n]) for n in self.names])

    def project(self, x):
        lo = np.array([self.bounds[n][0] for n in self.names])
        hi = np.array([self.bounds[n][1] for n in self.names])
        return np.clip(np.asarray(x, dtype=float), lo, hi)

    def propose(self, x, rng, scale):
        return self.project(x + rng.normal(0.0, scale, x.size))

    def decode(self, x, refine: int = 1):
        params = {n: float(v) for n, v in zip(self.names, self.project(x))}
        return [getattr(ParametricDensity, self.family)(**params)]

    def is_feasible(self, x) -> bool:
        return bool(np.all(self.project(x) == x))


# ---------------------------------------------------------------------------
# problem and trace
# ---------------------------------------------------------------------------

@dataclass
class SearchProblem:
    objective: str
    space: object
    check_name: str | None = None
    check_kwargs: dict = field(default_factory=dict)
    cells: int = 4096

    def __post_init__(self):
        if self.objective not in (MAX_SIGMA_MINUS, MAX_SIGMA_PLUS, MIN_SLACK):
            raise ValidationError(f"unknown objective {self.objective!r}")
        if self.objective == MIN_SLACK:
            if self.check_name is None:
                raise ValidationError("min_slack needs a check name")
            get_check(self.check_name)

    @property
    def maximize(self) -> bool:
        return self.objective != MIN_SLACK

    def value(self, x, refine: int = 1) -> float:
        """Objective in its natural sense (sigma, or slack)."""
        ds = self.space.decode(x, refine)
        if self.objective == MIN_SLACK:
            r = check(self.check_name, *ds, retry=False, cells=self.cells * refine,
                      **self.check_kwargs)
            return r.slack
        sign = -1 if self.objective == MAX_SIGMA_MINUS else 1
        return _sigma(ds[0], sign, None, cells=self.cells * refine)[0]

    def loss(self, x) -> float:
        """Quantity minimised by the optimisers."""
        v = self.value(x)
        return -v if self.maximize else v


class _BudgetExhausted(Exception):
    pass


@dataclass
class SearchTrace:
    objective: str
    method: str
    seed: int
    values: list = field(default_factory=list)  # best-so-far after each accepted step
    best_x: np.ndarray | None = None
    best_value: float = math.nan
    best_value_refined: float = math.nan
    termination: str = ""
    evaluations: int = 0
    wall_clock: float = 0.0
    restarts: list = field(default_factory=list)
    confirmed_violation: bool | None = None

    def to_dict(self) -> dict:
        return {
            "objective": self.objective, "method": self.method, "seed": self.seed,
            "values": [float(v) for v in self.values],
            "best_x": None if self.best_x is None else [float(v) for v in self.best_x],
            "best_value": float(self.best_value),
            "best_value_refined": float(self.best_value_refined),
            "termination": self.termination, "evaluations": self.evaluations,
            "wall_clock": self.wall_clock, "restarts": self.restarts,
            "confirmed_violation": self.confirmed_violation,
        }

    def write_json(self, path) -> Path:
        path = Path(path)
        path.write_text(json.dumps(self.to_dict(), indent=1))
        return path

    def write_csv(self, path) -> Path:
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["iteration", "objective"])
            for i, v in enumerate(self.values):
                w.writerow([i, repr(float(v))])
        return path


class _Tracker:
    """Counts evaluations, enforces the budget and keeps best-so-far."""

    def __init__(self, problem: SearchProblem, max_evals: int, deadline: float):
        self.problem, self.max_evals, self.deadline = problem, max_evals, deadline
        self.evals = 0
        self.best_loss = math.inf
        self.best_x = None
        self.history: list[float] = []

    def __call__(self, x) -> float:
        if self.evals >= self.max_evals:
            raise _BudgetExhausted("evaluation budget exhausted")
        if time.perf_counter() > self.deadline:
            raise _BudgetExhausted("time budget exhausted")
        x = self.problem.space.project(x)
        self.evals += 1
        try:
            loss = self.problem.loss(x)
        except (ValidationError, ValueError):
            loss = math.inf
        if not math.isfinite(loss):
            loss = math.inf
        if loss < self.best_loss:
            self.best_loss, self.best_x = loss, np.array(x, copy=True)
        return loss

    def accept(self):
        if self.best_x is not None:
            self.history.append(self.best_loss)


# ---------------------------------------------------------------------------
# optimisers
# ---------------------------------------------------------------------------

def _nelder_mead(f: _Tracker, x0, rng, max_iter):
    def fun(x):
        return f(x)

    sopt.minimize(fun, x0, method="Nelder-Mead", callback=lambda *_: f.accept(),
                  options={"maxiter": max_iter, "maxfev": f.max_evals, "xatol": 1e-10,
                           "fatol": 1e-12, "adaptive": False})
    return "converged"


def _fd_gradient(f: _Tracker, x, fx):
    g = np.empty_like(x)
    for i in range(x.size):
        h = FD_STEP * max(1.0, abs(x[i]))
        xp = x.copy()
        xp[i] += h
        g[i] = (f(xp) - fx) / h
    return g


def _projected_gradient(f: _Tracker, x0, rng, max_iter):
    x = f.problem.space.project(x0)
    fx = f(x)
    step = 1.0
    for _ in range(max_iter):
        g = _fd_gradient(f, x, fx)
        gn = np.linalg.norm(g)
        if not np.isfinite(gn) or gn < 1e-12:
            return "converged"
        improved = False
        while step > 1e-10:
            xn = f.problem.space.project(x - step * g / gn)
            fn = f(xn)
            if fn < fx:
                x, fx = xn, fn
                step *= 2.0
                improved = True
                break
            step *= 0.5
        f.accept()
        if not improved:
            return "converged"
    return "iteration limit"


def _simulated_annealing(f: _Tracker, x0, rng, max_iter, t0: float = 0.05, t_end: float = 1e-5,
                         scale0: float = 1.0):
    space = f.problem.space
    x = space.project(x0)
    fx = f(x)
    for k in range(max_iter):
        frac = k / max(1, max_iter - 1)
        temp = t0 * (t_end / t0) ** frac
        scale = scale0 * (0.01 ** frac)
        y = space.propose(x, rng, scale)
        fy = f(y)
        if fy <= fx or rng.random() < math.exp(-(fy - fx) / temp):
            x, fx = y, fy
        f.accept()
    return "iteration limit"


_OPTIMISERS = {
    "nelder-mead": _nelder_mead,
    "projected-gradient": _projected_gradient,
    "simulated-annealing": _simulated_annealing,
}


def optimize(problem: SearchProblem, method: str = "projected-gradient", *, restarts: int = 8,
             seed: int = 0, max_evals: int = 10_000, time_budget: float = 600.0,
             max_iter: int = 100_000, initial: Sequence[np.ndarray] | None = None,
             violation_tolerance: float | None = None) -> SearchTrace:
    """Run ``restarts`` seeded searches sharing an evaluation budget.

    The best point is re-evaluated at twice the resolution; for a theorem
    bound (sigma_+ <= 2 or a check's slack >= 0) a violation is only
    reported as confirmed when the refined value also violates.
    """
    if method not in _OPTIMISERS:
        raise ValidationError(f"unknown method {method!r}; choose from {METHODS}")
    if restarts < 1:
        raise ValidationError("need at least one restart")
    t_start = time.perf_counter()
    deadline = t_start + time_budget
    children = np.random.SeedSequence(seed).spawn(restarts)
    per_restart = max(1, max_evals // restarts)
    trace = SearchTrace(problem.objective, method, seed)
    best_loss, best_x = math.inf, None
    total = 0
    reasons = []
    for r, ss in enumerate(children):
        rng = np.random.default_rng(ss)
        x0 = initial[r % len(initial)] if initial else problem.space.random_point(rng)
        tracker = _Tracker(problem, per_restart, deadline)
        try:
            reason = _OPTIMISERS[method](tracker, np.asarray(x0, dtype=float), rng, max_iter)
        except _BudgetExhausted as exc:
            reason = str(exc)
        tracker.accept()
        total += tracker.evals
        reasons.append(reason)
        sign = -1 if problem.maximize else 1
        trace.restarts.append({"restart": r, "best": sign * tracker.best_loss,
                               "evaluations": tracker.evals, "termination": reason})
        for v in tracker.history:
            cur = min(best_loss, v)
            trace.values.append(sign * cur)
        if tracker.best_loss < best_loss:
            best_loss, best_x = tracker.best_loss, tracker.best_x
        if time.perf_counter() > deadline:
            break
    # best-so-far across restarts is monotone
    if problem.maximize:
        trace.values = list(np.maximum.accumulate(trace.values)) if trace.values else []
    else:
        trace.values = list(np.minimum.accumulate(trace.values)) if trace.values else []
    trace.best_x = best_x
    trace.best_value = (-best_loss if problem.maximize else best_loss) if best_x is not None else math.nan
    if best_x is not None:
        trace.best_value_refined = problem.value(best_x, refine=2)
    trace.evaluations = total
    trace.termination = ", ".join(sorted(set(reasons)))
    trace.wall_clock = time.perf_counter() - t_start
    trace.confirmed_violation = _violation(problem, trace, violation_tolerance)
    return trace


def _violation(problem: SearchProblem, trace: SearchTrace, tol) -> bool | None:
    if problem.objective == MAX_SIGMA_PLUS:
        tol = 5e-3 if tol is None else tol
        return bool(trace.best_value > 2 + tol and trace.best_value_refined > 2 + tol)
    if problem.objective == MIN_SLACK and get_check(problem.check_name).is_theorem:
        tol = 1e-9 if tol is None else tol
        return bool(trace.best_value < -tol and trace.best_value_refined < -tol)
    return None


def export_best(problem: SearchProblem, trace: SearchTrace, path) -> list[Path]:
    """Write the best point's densities as density files (suffixes _0, _1, ...)."""
    from .io import write_density
    path = Path(path)
    ds = problem.space.decode(trace.best_x)
    if len(ds) == 1:
        return [write_density(ds[0], path)]
    return [write_density(d, path.with_name(f"{path.stem}_{i}{path.suffix}")) for i, d in enumerate(ds)]


# ---------------------------------------------------------------------------
# problem files
# ---------------------------------------------------------------------------

SEARCH_DEFAULTS = {"method": "projected-gradient", "restarts": 8, "max_evals": 10_000,
                   "time_budget": 600.0, "seed": 0, "cells": 4096}


def space_from_dict(d: dict):
    kind = d.get("kind")
    if kind == "logconcave-grid":
        return LogConcaveGridSpace(int(d.get("knots", 64)), int(d.get("cells_per_knot", 16)))
    if kind == "simplex":
        return SimplexSpace(GroupSpec("finite", tuple(int(m) for m in d["moduli"])), int(d.get("k", 1)))
    if kind == "parametric":
        bounds = {k: tuple(map(float, v)) for k, v in d.get("bounds", {"shape": (1.0, 20.0)}).items()}
        return ParametricSpace(d.get("family", "gamma"), bounds)
    raise ValidationError(f"unknown search space {kind!r}")


def load_problem(obj: dict) -> tuple[SearchProblem, dict]:
    """Parse a search problem file into the problem and its optimizer settings.

    Example::

        {"objective": "max_sigma_minus",
         "space": {"kind": "logconcave-grid", "knots": 64, "cells_per_knot": 16},
         "method": "projected-gradient", "restarts": 8, "max_evals": 10000, "seed": 0}
    """
    if not isinstance(obj, dict):
        raise ValidationError("search problem must be a JSON object")
    try:
        space = space_from_dict(obj.get("space", {"kind": "logconcave-grid"}))
        opts = {k: type(v)(obj.get(k, v)) for k, v in SEARCH_DEFAULTS.items()}
        problem = SearchProblem(obj.get("objective", MAX_SIGMA_MINUS), space,
                                obj.get("check"), dict(obj.get("check_kwargs", {})),
                                cells=opts.pop("cells"))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(f"malformed search problem: {exc!r}") from None
    if opts["method"] not in METHODS:
        raise ValidationError(f"unknown method {opts['method']!r}; choose from {METHODS}")
    return problem, opts
