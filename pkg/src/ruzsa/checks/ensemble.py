"""Seeded ensembles of random inputs for registered checks."""
from __future__ import annotations

import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .. import generators as gen
from ..density import FinitePMF, GridDensity, JointPMF, ParametricDensity
from ..groups import GroupSpec
from ..io import encode_value
from .registry import check, get_check
from .result import FAIL, SKIPPED, _jsonable

M_RANGE = (4, 64)
MARKOV_M_RANGE = (2, 16)


def _cyclic(rng, lo, hi) -> GroupSpec:
    return GroupSpec.cyclic(int(rng.integers(lo, hi + 1)))


def finite_inputs(name: str, rng: np.random.Generator, m_range=M_RANGE):
    """Random finite-group inputs for any check that accepts them."""
    g = _cyclic(rng, *m_range)
    pmf = lambda: gen.random_varied_pmf(g, rng)
    if name in ("ruzsa_triangle", "ruzsa_triangle_sharp", "subadditivity",
                "monotonicity", "submodularity"):
        return (pmf(), pmf(), pmf()), {}
    if name == "plunnecke_ruzsa":
        return (pmf(),) + tuple(pmf() for _ in range(int(rng.integers(1, 5)))), {}
    if name == "sum_difference":
        return (pmf(), pmf()), {}
    if name in ("doubling_difference_ratio", "discrete_sd_ratio"):
        return (pmf(),), {}
    if name == "weighted_sum_lemma":
        a = int(rng.choice([-1, 1])) * int(rng.integers(1, 7))
        b = int(rng.choice([-1, 1])) * int(rng.integers(1, 7))
        return (pmf(), pmf(), a, b), {}
    if name == "weighted_sum_theorem":
        return (pmf(), pmf(), int(rng.integers(1, 40)), int(rng.integers(1, 40))), {}
    if name == "sumset_triangle":
        return tuple(gen.random_subset(g, rng, max_size=max(1, g.order // 2)) for _ in range(3)) + (g,), {}
    return markov_inputs(name, rng)


def markov_inputs(name: str, rng: np.random.Generator, m_range=MARKOV_M_RANGE):
    """Random joints for the conditional / dependent checks."""
    g = _cyclic(rng, *m_range)
    if name == "cond_reduces":
        gy = _cyclic(rng, *m_range)
        return (gen.random_varied_pmf(g, rng),
                gen.random_joint((gy, g), rng, float(rng.choice([0.1, 0.5, 1.0])))), {}
    if name == "cond_ruzsa_bound":
        return (gen.random_markov_triple(g, g, rng, symmetric=bool(rng.random() < 0.3)),), {}
    if name in ("cond_ruzsa_symmetric", "bsg"):
        return (gen.random_joint((g, g), rng, float(rng.choice([0.1, 0.5, 1.0]))),), {}
    raise ValueError(f"no finite generator for check {name!r}")


def grid_inputs(name: str, rng: np.random.Generator, cells: int = 256):
    """Arbitrary (not log-concave) 1-D grid densities."""
    k = {"ruzsa_triangle": 3, "subadditivity": 3, "monotonicity": 3, "submodularity": 3,
         "sum_difference": 2}.get(name, 1)
    return tuple(gen.random_grid(rng, cells) for _ in range(k)), {}


def logconcave_inputs(name: str, rng: np.random.Generator, cells: int = 512):
    p = gen.random_logconcave_grid(rng, cells)
    if name == "cover_zhang":
        return (p,), {"coupling": gen.sinkhorn_coupling(p.masses, rng)}
    if name == "ball_nguyen":
        raise ValueError("ball_nguyen needs a known Poincare constant; supply inputs explicitly")
    return (p,), {}


def pd_inputs(name: str, rng: np.random.Generator, dim: int = 3):
    if name == "det_sum":
        k = int(rng.integers(1, 5))
        return tuple(gen.random_pd_matrix(dim, rng) for _ in range(k + 1)), {}
    return (gen.random_pd_matrix(dim, rng), gen.random_pd_matrix(dim, rng)), {}


GENERATORS: dict[str, Callable] = {
    "finite": finite_inputs,
    "markov": markov_inputs,
    "grid": grid_inputs,
    "logconcave-grid": logconcave_inputs,
    "pd": pd_inputs,
}


@dataclass
class EnsembleSummary:
    name: str
    generator: str
    trials: int
    seed: int
    violations: int
    min_slack: float
    argmin_trial: int
    argmin_digest: str
    statuses: dict = field(default_factory=dict)
    max_lhs: float = math.nan
    min_rhs: float = math.nan
    elapsed: float = 0.0
    argmin_path: str | None = None
    ratio_min: float = math.nan  # sum/difference ratio, for ratio-type checks
    ratio_max: float = math.nan

    def to_dict(self) -> dict:
        return _jsonable(asdict(self))


def _run_chunk(name, generator, seeds, gen_opts, check_kw):
    make = GENERATORS[generator] if isinstance(generator, str) else generator
    out = []
    for i, ss in seeds:
        rng = np.random.default_rng(ss)
        args, kw = make(name, rng, **gen_opts)
        r = check(name, *args, **{**kw, **check_kw})
        num, den = r.metadata.get("numerator"), r.metadata.get("denominator")
        ratio = num / den if num is not None and den else math.nan
        out.append((i, r.status, r.slack, r.lhs, r.rhs, r.inputs_digest, ratio))
    return out


def replay_inputs(name: str, generator, seed: int, trial: int, trials: int, **gen_opts):
    """Regenerate the inputs of one trial of an ensemble."""
    ss = np.random.SeedSequence(seed).spawn(trials)[trial]
    make = GENERATORS[generator] if isinstance(generator, str) else generator
    return make(name, np.random.default_rng(ss), **gen_opts)


def run_ensemble(name: str, generator="finite", trials: int = 1000, seed: int = 0, *,
                 n_jobs: int = 1, persist: str | Path | None = None,
                 gen_opts: dict | None = None, **check_kw) -> EnsembleSummary:
    """Run ``trials`` seeded random instances of a check.

    Trial i draws from the i-th child of ``SeedSequence(seed)``, so results
    do not depend on ``n_jobs``. The argmin-slack inputs can be written to
    ``persist`` for replay.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    get_check(name)
    gen_opts = gen_opts or {}
    t0 = time.perf_counter()
    seeds = list(enumerate(np.random.SeedSequence(seed).spawn(trials)))
    if n_jobs > 1:
        chunks = [seeds[i::n_jobs] for i in range(n_jobs)]
        with ProcessPoolExecutor(n_jobs) as ex:
            futs = [ex.submit(_run_chunk, name, generator, c, gen_opts, check_kw) for c in chunks]
            rows = [r for f in futs for r in f.result()]
    else:
        rows = _run_chunk(name, generator, seeds, gen_opts, check_kw)
    rows.sort()
    statuses: dict[str, int] = {}
    for r in rows:
        statuses[r[1]] = statuses.get(r[1], 0) + 1
    scored = [r for r in rows if r[1] != SKIPPED and not math.isnan(r[2])]
    best = min(scored, key=lambda r: r[2]) if scored else (-1, SKIPPED, math.nan, math.nan, math.nan, "", math.nan)
    summary = EnsembleSummary(
        name=name, generator=generator if isinstance(generator, str) else generator.__name__,
        trials=trials, seed=seed, violations=statuses.get(FAIL, 0),
        min_slack=best[2], argmin_trial=best[0], argmin_digest=best[5], statuses=statuses,
        max_lhs=max((r[3] for r in scored), default=math.nan),
        min_rhs=min((r[4] for r in scored), default=math.nan),
        elapsed=time.perf_counter() - t0)
    ratios = [r[6] for r in rows if not math.isnan(r[6])]
    if ratios:
        summary.ratio_min, summary.ratio_max = min(ratios), max(ratios)
    if persist is not None and best[0] >= 0:
        args, kw = replay_inputs(name, generator, seed, best[0], trials, **gen_opts)
        path = Path(persist)
        path.write_text(json.dumps({
            "check": name, "seed": seed, "trial": best[0], "trials": trials,
            "slack": best[2], "digest": best[5],
            "args": [encode_value(a) for a in args],
            "kwargs": {k: encode_value(v) for k, v in kw.items()},
        }, default=_jsonable))
        summary.argmin_path = str(path)
    return summary
