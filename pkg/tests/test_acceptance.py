"""Acceptance criteria, one test (or test group) per criterion.

Each criterion records a PASS/FAIL line through the ``acceptance`` fixture;
the lines are repeated in the terminal summary. Run with
``pytest tests/test_acceptance.py -v -s`` to see them inline.
"""
import math
import os
import time
from functools import lru_cache

import numpy as np
import pytest
from scipy import integrate, stats

from ruzsa import generators as gen
from ruzsa import kernels
from ruzsa.campaign import example
from ruzsa.checks import FAIL, PASS, check, run_ensemble
from ruzsa.checks.ensemble import pd_inputs
from ruzsa.convolve import convolve, convolve_fft
from ruzsa.density import CircleDensity, ParametricDensity, PositiveDensity
from ruzsa.entropy import entropy
from ruzsa.groups import GroupSpec, random_unimodular
from ruzsa.metrics import difference_constant, doubling_constant, ruzsa_divergence
from ruzsa.search import (
    MAX_SIGMA_MINUS,
    MAX_SIGMA_PLUS,
    LogConcaveGridSpace,
    SearchProblem,
    optimize,
)

GRID_TOL = 5e-3
JOBS = os.cpu_count() or 1
HALF_LOG_2 = 0.5 * math.log(2)


def gauss_grid():
    return ParametricDensity.gaussian().to_grid(4096, box=([-8.0], [8.0]))


# ---------------------------------------------------------------------------
# 1. Gaussian equality anchor
# ---------------------------------------------------------------------------

def test_criterion_1_gaussian(acceptance):
    t0 = time.perf_counter()
    g, grid = ParametricDensity.gaussian(), gauss_grid()
    d_cf, d_grid = ruzsa_divergence(g, g), ruzsa_divergence(grid, grid)
    s_cf = (doubling_constant(g), difference_constant(g))
    s_grid = (doubling_constant(grid), difference_constant(grid))
    elapsed = time.perf_counter() - t0
    ok = (abs(d_cf - HALF_LOG_2) <= 1e-10 and abs(d_grid - HALF_LOG_2) <= GRID_TOL
          and all(abs(s - 1) <= 1e-8 for s in s_cf)
          and all(abs(s - 1) <= GRID_TOL for s in s_grid) and elapsed < 1.0)
    acceptance(1, ok, f"d_R(X||X) closed {d_cf:.12f} grid {d_grid:.6f}; "
                      f"sigma+/- grid {s_grid[0]:.5f}/{s_grid[1]:.5f}; {elapsed:.2f}s")
    assert ok


# ---------------------------------------------------------------------------
# 2. Exponential anchors
# ---------------------------------------------------------------------------

def test_criterion_2_exponential(acceptance):
    t0 = time.perf_counter()
    e = ParametricDensity.exponential()
    # oracles: scipy entropies of Exp(1), Laplace(1) (= X - X') and Gamma(2,1) (= X + X')
    h_x = stats.expon().entropy()
    sm_oracle = 0.5 * math.exp(2 * (stats.laplace().entropy() - h_x))
    sp_oracle = 0.5 * math.exp(2 * (stats.gamma(2).entropy() - h_x))
    sm, sp = difference_constant(e), doubling_constant(e)
    grid = e.to_grid(4096)
    sm_grid, sp_grid = difference_constant(grid), doubling_constant(grid)
    checks = [check(n, d) for d in (e, grid)
              for n in ("reverse_epi_iid", "rogers_shephard_entropy", "ruzsa_div_ub")]
    elapsed = time.perf_counter() - t0
    ok = (abs(sm - 2) <= 1e-8 and abs(sm_oracle - 2) <= 1e-8 and abs(sm_grid - 2) <= GRID_TOL
          and abs(sp - sp_oracle) <= 1e-6 and abs(sp_grid - sp_oracle) <= GRID_TOL
          and all(r.status == PASS for r in checks) and elapsed < 5.0)
    acceptance(2, ok, f"sigma- {sm:.10f} (grid {sm_grid:.5f}); sigma+ {sp:.8f} vs oracle "
                      f"{sp_oracle:.8f} (grid {sp_grid:.5f}); 6 bound checks pass; {elapsed:.2f}s")
    assert ok


# ---------------------------------------------------------------------------
# 3. Uniform anchors
# ---------------------------------------------------------------------------

def test_criterion_3_uniform(acceptance):
    t0 = time.perf_counter()
    tri = lambda x: 1 - abs(x)
    h_tri, _ = integrate.quad(lambda x: -tri(x) * math.log(tri(x)) if tri(x) > 0 else 0.0, -1, 1,
                              points=[0.0])
    target = 0.5 * math.exp(2 * h_tri)  # h(U) = 0
    grid = ParametricDensity.uniform().to_grid(4096)
    sp, sm = doubling_constant(grid), difference_constant(grid)
    r = check("doubling_difference_ratio", grid)
    ratio = r.metadata["numerator"] / r.metadata["denominator"]
    elapsed = time.perf_counter() - t0
    ok = (abs(h_tri - 0.5) <= 1e-12 and abs(sp - target) <= GRID_TOL and abs(sm - target) <= GRID_TOL
          and abs(ratio - 1) <= GRID_TOL and r.status == PASS and elapsed < 1.0)
    acceptance(3, ok, f"integral oracle h(U+U') = {h_tri:.12f}; sigma+ {sp:.5f} sigma- {sm:.5f} "
                      f"(e/2 = {math.e / 2:.5f}); ratio {ratio:.6f}; {elapsed:.2f}s")
    assert ok


# ---------------------------------------------------------------------------
# 4. Ensemble theorem suite
# ---------------------------------------------------------------------------

TRIALS = 10_000
SUITE = (
    ("ruzsa_triangle", "finite"), ("ruzsa_triangle_sharp", "finite"), ("subadditivity", "finite"),
    ("monotonicity", "finite"), ("plunnecke_ruzsa", "finite"), ("submodularity", "finite"),
    ("cond_reduces", "markov"), ("cond_ruzsa_bound", "markov"), ("cond_ruzsa_symmetric", "markov"),
    ("bsg", "markov"), ("sum_difference", "finite"), ("weighted_sum_lemma", "finite"),
    ("weighted_sum_theorem", "finite"), ("epi_lower", "grid"), ("sumset_triangle", "finite"),
)
BSG_REASON = "the entropic BSG bound has counterexamples on small cyclic groups"


@lru_cache(maxsize=None)
def _ensemble(name, generator):
    return run_ensemble(name, generator, TRIALS, seed=2024, n_jobs=JOBS)


@pytest.mark.parametrize("name,generator", [
    pytest.param(n, g, marks=pytest.mark.xfail(strict=True, reason=BSG_REASON) if n == "bsg" else ())
    for n, g in SUITE])
def test_criterion_4_ensemble(name, generator):
    s = _ensemble(name, generator)
    assert s.trials == TRIALS and s.violations == 0, (name, s.violations, s.min_slack)


def _criterion_4_violations():
    t0 = time.perf_counter()
    out = {n: _ensemble(n, g) for n, g in SUITE}
    return out, time.perf_counter() - t0


def test_criterion_4_only_bsg_violates():
    out, _ = _criterion_4_violations()
    assert {n for n, s in out.items() if s.violations} == {"bsg"}
    assert out["bsg"].min_slack < -0.05  # far beyond any tolerance


@pytest.mark.xfail(strict=True, reason=BSG_REASON)
def test_criterion_4_summary(acceptance):
    out, elapsed = _criterion_4_violations()
    bad = {n: s for n, s in out.items() if s.violations}
    worst = min(s.min_slack for n, s in out.items() if n not in bad)
    detail = (f"{len(SUITE)} checks x {TRIALS} trials; min slack of clean checks {worst:.2e}; "
              + ", ".join(f"{n}: {s.violations} violations (min slack {s.min_slack:.3f})"
                          for n, s in bad.items()))
    acceptance(4, not bad, detail or "no violations")
    assert not bad


# ---------------------------------------------------------------------------
# 5. Convolver equivalence
# ---------------------------------------------------------------------------

def test_criterion_5_convolution(acceptance):
    rng = np.random.default_rng(5)
    worst = 0.0
    for _ in range(1000):
        m = int(rng.integers(2, 513))
        p, q = rng.dirichlet(np.ones(m)), rng.dirichlet(np.ones(m))
        worst = max(worst, float(np.abs(kernels.cyclic_convolve_naive(p, q, (m,))
                                        - convolve_fft(p, q, (m,))).max()))
    grid = gauss_grid()
    h2 = float(entropy(convolve(grid, grid)))
    ref = float(entropy(ParametricDensity.gaussian(0.0, 2.0)))
    ok = worst <= 1e-12 and abs(h2 - ref) <= GRID_TOL
    acceptance(5, ok, f"1000 pairs m<=512 max |naive - fft| {worst:.2e}; "
                      f"h(grid N(0,1) * itself) {h2:.6f} vs h(N(0,2)) {ref:.6f}")
    assert ok


# ---------------------------------------------------------------------------
# 6. Unimodular invariance
# ---------------------------------------------------------------------------

def test_criterion_6_unimodular(acceptance):
    rng = np.random.default_rng(6)
    worst_h = worst_d = 0.0
    for _ in range(1000):
        m = int(rng.integers(2, 17))
        base = GroupSpec.cyclic(m)
        j = gen.random_joint((base, base), rng, 0.5)
        A = random_unimodular(2, rng)
        worst_h = max(worst_h, abs(float(entropy(j.linear_pushforward(A))) - float(entropy(j))))
        g2 = base.power(2)
        x, y = gen.random_varied_pmf(g2, rng), gen.random_varied_pmf(g2, rng)
        lhs = ruzsa_divergence(x, y.transform(A, base))
        rhs = ruzsa_divergence(x.transform(A.inverse(), base), y)
        worst_d = max(worst_d, abs(lhs - rhs))
    ok = worst_h <= 1e-12 and worst_d <= 1e-10
    acceptance(6, ok, f"1000 GL_2(Z) matrices: max |h(AX) - h(X)| {worst_h:.2e}; "
                      f"max |d_R(X||AY) - d_R(A^-1 X||Y)| {worst_d:.2e}")
    assert ok


# ---------------------------------------------------------------------------
# 7. Determinant suite
# ---------------------------------------------------------------------------

def test_criterion_7_determinants(acceptance):
    t0 = time.perf_counter()
    violations, worst_rel = 0, 0.0
    for dim in (2, 3, 5):
        for name in ("det_minkowski", "det_rotfeld"):
            violations += run_ensemble(name, "pd", TRIALS, seed=dim, n_jobs=JOBS,
                                       gen_opts={"dim": dim}).violations
        for ss in np.random.SeedSequence(100 + dim).spawn(TRIALS):
            args, _ = pd_inputs("det_sum", np.random.default_rng(ss), dim=dim)
            r = check("det_sum", *args)
            violations += r.status == FAIL
            worst_rel = max(worst_rel, r.metadata["gaussian_route_rel_err"])
    elapsed = time.perf_counter() - t0
    ok = violations == 0 and worst_rel <= 1e-9 and elapsed < 60
    acceptance(7, ok, f"3 checks x {TRIALS} matrices x dims 2,3,5: {violations} violations; "
                      f"Gaussian-route max rel err {worst_rel:.2e}; {elapsed:.1f}s")
    assert ok


# ---------------------------------------------------------------------------
# 8. Multiplicative, circle and complex corollaries
# ---------------------------------------------------------------------------

def test_criterion_8_other_groups(acceptance):
    closed = check("multiplicative_pair", PositiveDensity.lognormal())
    grid = check("multiplicative_pair", PositiveDensity(gauss_grid()))
    # log(XY) ~ N(0, 2) and E log(XY) = 0, so h(XY) = 1/2 log(4 pi e)
    oracle = 0.5 * math.log(4 * math.pi * math.e)
    agree = max(abs(closed.metadata["parts"][k][s] - grid.metadata["parts"][k][s])
                for k in ("product", "quotient") for s in ("lhs", "rhs"))
    circ = check("circle_ratio", CircleDensity.wrapped_gaussian(0.5, 0.7, 1024))
    cplx = check("complex_pair", example("complex-example"))
    statuses = [closed.status, grid.status, circ.status, cplx.status]
    ok = (all(s == PASS for s in statuses) and agree <= GRID_TOL
          and abs(closed.metadata["h(XY)"] - oracle) <= 1e-10)
    acceptance(8, ok, f"positive reals closed/grid {closed.status}/{grid.status} (max side gap "
                      f"{agree:.1e}); circle {circ.status} (slack {circ.slack:.3f}); "
                      f"complex {cplx.status} (slack {cplx.slack:.3f})")
    assert ok


# ---------------------------------------------------------------------------
# 9. Gauss distance and Ball-Nguyen
# ---------------------------------------------------------------------------

def test_criterion_9_gauss_distance(acceptance):
    s = run_ensemble("gauss_distance", "logconcave-grid", 100, seed=9, n_jobs=JOBS)
    bn = check("ball_nguyen", ParametricDensity.exponential(), c=0.25)
    part = bn.metadata["parts"]["corollary"]
    ok = (s.violations == 0 and s.min_slack >= -GRID_TOL and bn.status == PASS
          and abs(bn.metadata["D"] - 0.41894) <= 1e-5
          and abs(part["rhs"] - 10 * math.log(0.5 * math.exp(2 * np.euler_gamma))) <= 1e-9)
    acceptance(9, ok, f"gauss_distance 100 log-concave grids min slack {s.min_slack:.4f}; "
                      f"Ball-Nguyen Exp(1), c=1/4: D {part['lhs']:.5f} <= {part['rhs']:.4f}")
    assert ok


# ---------------------------------------------------------------------------
# 10. Conjecture probe
# ---------------------------------------------------------------------------

def test_criterion_10_search(acceptance):
    t0 = time.perf_counter()
    space = LogConcaveGridSpace(64, 16)
    minus = optimize(SearchProblem(MAX_SIGMA_MINUS, space), "projected-gradient",
                     restarts=8, seed=0, max_evals=10_000)
    plus = optimize(SearchProblem(MAX_SIGMA_PLUS, space), "projected-gradient",
                    restarts=8, seed=0, max_evals=10_000)
    elapsed = time.perf_counter() - t0
    ok = (1.9 <= minus.best_value <= 2 + GRID_TOL and minus.best_value_refined <= 2 + GRID_TOL
          and max(minus.values) <= 2 + GRID_TOL
          and max(plus.values) <= 2 + GRID_TOL and plus.confirmed_violation is False
          and elapsed < 600)
    acceptance(10, ok, f"max sigma- {minus.best_value:.5f} (2x grid {minus.best_value_refined:.5f}); "
                       f"max sigma+ {plus.best_value:.5f}; {minus.evaluations + plus.evaluations} "
                       f"evaluations; {elapsed:.1f}s")
    assert ok
