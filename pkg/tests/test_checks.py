import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ruzsa import generators as gen
from ruzsa.checks import (
    CONJECTURE,
    FAIL,
    OBSERVATIONAL,
    PASS,
    SKIPPED,
    REGISTRY,
    check,
    get_check,
    list_checks,
    run_ensemble,
    tau,
)
from ruzsa.checks.ensemble import replay_inputs
from ruzsa.density import FinitePMF, GridDensity, JointPMF, ParametricDensity
from ruzsa.errors import (
    PreconditionError,
    TheoremViolation,
    UnknownCheckError,
    ValidationError,
)
from ruzsa.groups import GroupSpec

Z = GroupSpec.cyclic
EXP_SIGMA_PLUS = 0.5 * math.exp(2 * np.euler_gamma)
SYM_Z2 = [[0.4, 0.1], [0.1, 0.4]]


def _point(m, k=0):
    p = np.zeros(m)
    p[k] = 1.0
    return FinitePMF(Z(m), p)


class TestRegistry:
    def test_thirty_named_checks(self):
        names = list_checks()
        assert len(names) == 30 == len(set(names))
        assert names[0] == "ruzsa_triangle" and names[-1] == "discrete_sd_ratio"

    def test_statuses(self):
        assert get_check("conjecture_sd").status == CONJECTURE
        assert get_check("discrete_sd_ratio").status == OBSERVATIONAL
        assert sum(s.is_theorem for s in REGISTRY.values()) == 28

    def test_unknown(self):
        with pytest.raises(UnknownCheckError, match="no_such"):
            check("no_such", FinitePMF.uniform(Z(2)))

    def test_tau(self):
        assert tau(1, 1) == 12.0
        assert tau(3, 1) == 18.0  # floor(log 3) = 1
        assert tau(-20, 8) == 6.0 * (2 + 2 + 2)


class TestExamples:
    def test_triangle_uniform_z2(self):
        u = FinitePMF.uniform(Z(2))
        r = check("ruzsa_triangle", u, u, u)
        assert (r.lhs, r.rhs) == (pytest.approx(0, abs=1e-15), pytest.approx(0, abs=1e-15))
        assert abs(r.slack) <= 1e-15 and r.status == PASS

    def test_det_sum_identity(self):
        I = np.eye(2)
        r = check("det_sum", I, I, I)
        assert r.lhs == pytest.approx(9.0, abs=1e-12)
        assert r.rhs == pytest.approx(16.0, abs=1e-12)
        assert r.slack == pytest.approx(7.0, abs=1e-12)
        assert r.metadata["gaussian_route"] == pytest.approx([9.0, 16.0], rel=1e-9)

    def test_reverse_epi_exponential_grid(self):
        r = check("reverse_epi_iid", ParametricDensity.exponential().to_grid(2048))
        assert r.status == PASS and r.rhs == 2.0
        assert r.lhs == pytest.approx(EXP_SIGMA_PLUS, abs=5e-3)
        assert r.tolerance == 5e-3

    def test_reverse_epi_exponential_closed_form(self):
        r = check("reverse_epi_iid", ParametricDensity.exponential())
        assert r.lhs == pytest.approx(EXP_SIGMA_PLUS, abs=1e-12)
        assert r.tolerance == 1e-6

    def test_sumset_triangle_hand_count(self):
        g = Z(12)
        A, B, C = {0, 1, 2}, {0, 4}, {0, 6}
        # A-C = {0,1,2,6,7,8}, A-B = {0,1,2,8,9,10}, B-C = {0,4,6,10}
        r = check("sumset_triangle", A, B, C, g)
        assert (r.lhs, r.rhs) == (12.0, 24.0)

    def test_cond_reduces_decomposition(self, rng):
        px = gen.random_varied_pmf(Z(5), rng)
        r = check("cond_reduces", px, gen.random_joint((Z(3), Z(5)), rng, 0.5))
        assert abs(r.metadata["decomposition_residual"]) <= 1e-12
        assert r.metadata["I(Y;X-Z)"] >= -1e-12


class TestEqualityCases:
    def test_triangle_point_masses(self, rng):
        # X2 a point mass and X1 - X3 without entropy loss
        m = 9
        for _ in range(10):
            x3 = gen.random_varied_pmf(Z(m), rng)
            r = check("ruzsa_triangle", _point(m, int(rng.integers(m))), _point(m, 3), x3)
            assert abs(r.slack) <= 1e-12
        a = FinitePMF(Z(8), [0.5, 0.5, 0, 0, 0, 0, 0, 0])
        c = FinitePMF(Z(8), [0.3, 0, 0.7, 0, 0, 0, 0, 0])
        assert abs(check("ruzsa_triangle", a, _point(8), c).slack) <= 1e-12

    def test_epi_lower_gaussian(self, rng):
        K = gen.random_pd_matrix(3, rng)
        r = check("epi_lower", ParametricDensity.gaussian(np.zeros(3), K))
        assert abs(r.slack) <= 1e-12
        grid = ParametricDensity.gaussian().to_grid(4096, box=([-8.0], [8.0]))
        assert abs(check("epi_lower", grid).slack) <= 5e-3

    def test_det_minkowski_equal_matrices(self, rng):
        for n in (2, 3, 5):
            A = gen.random_pd_matrix(n, rng)
            assert abs(check("det_minkowski", A, A).slack) <= 1e-9 * max(1, np.linalg.det(2 * A))

    def test_det_minkowski_proportional(self, rng):
        A = gen.random_pd_matrix(3, rng)
        assert abs(check("det_minkowski", A, 2.5 * A).slack) <= 1e-9 * np.linalg.det(3.5 * A)


class TestStatusAndTolerance:
    def test_tolerance_by_representation(self, rng):
        p = gen.random_pmf(Z(6), rng)
        assert check("ruzsa_triangle", p, p, p).tolerance == 1e-9
        g = ParametricDensity.gaussian()
        assert check("ruzsa_triangle", g, g, g).tolerance == 1e-6
        grid = gen.random_grid(rng, 64)
        r = check("ruzsa_triangle", grid, grid, grid)
        assert r.tolerance == 5e-3 and r.metadata["representation"] == "grid"

    def test_tolerance_override(self, rng):
        p = gen.random_pmf(Z(6), rng)
        assert check("ruzsa_triangle", p, p, p, tolerance=0.25).tolerance == 0.25

    @given(st.integers(0, 2 ** 32 - 1), st.floats(1e-12, 1.0))
    def test_pass_iff_slack_within_tolerance(self, seed, tol):
        rng = np.random.default_rng(seed)
        j = gen.random_joint((Z(2), Z(2)), rng, 0.3)
        r = check("bsg", j, tolerance=tol)
        assert r.passed == (r.slack >= -tol)
        assert r.status == (PASS if r.passed else FAIL)

    def test_strict_raises_on_failure(self):
        j = JointPMF([Z(2), Z(2)], SYM_Z2)
        r = check("bsg", j)
        assert r.status == FAIL
        with pytest.raises(TheoremViolation):
            check("bsg", j, strict=True)

    def test_conjecture_never_fails(self):
        r = check("conjecture_sd", ParametricDensity.exponential())
        assert r.status == CONJECTURE and r.lhs == pytest.approx(2.0, abs=1e-12)
        bad = check("conjecture_sd", ParametricDensity.exponential(), tolerance=0.0)
        assert bad.status == CONJECTURE

    def test_observational(self, rng):
        r = check("discrete_sd_ratio", gen.random_varied_pmf(Z(11), rng))
        assert r.status == OBSERVATIONAL

    def test_ratio_guard_skips(self):
        r = check("doubling_difference_ratio", FinitePMF.uniform(Z(6)))
        assert r.status == SKIPPED and "guard" in r.metadata["skip_reason"]
        assert math.isnan(r.slack) and r.passed

    def test_result_serialises(self, rng):
        r = check("subadditivity", *(gen.random_pmf(Z(5), rng) for _ in range(3)))
        d = json.loads(r.to_json())
        assert d["pass"] is True and d["name"] == "subadditivity"
        assert set(d) >= {"lhs", "rhs", "slack", "tolerance", "inputs_digest", "metadata"}

    def test_digest_depends_on_inputs_and_params(self, rng):
        p, z = gen.random_pmf(Z(8), rng), gen.random_pmf(Z(8), rng)
        r1 = check("weighted_sum_lemma", p, z, 2, 3)
        assert r1.inputs_digest == check("weighted_sum_lemma", p, z, 2, 3).inputs_digest
        assert r1.inputs_digest != check("weighted_sum_lemma", p, z, 3, 2).inputs_digest

    def test_left_side_flagged(self, rng):
        p, z = gen.random_pmf(Z(8), rng), gen.random_pmf(Z(8), rng)
        assert check("weighted_sum_lemma", p, z, 2, 3).metadata["left_side"] == "aX+Z"
        r = check("weighted_sum_lemma", p, z, 2, 3, left="aX+bX'")
        assert r.metadata["left_side"] == "aX+bX'"


class TestPreconditions:
    def test_density_checks_reject_pmfs(self):
        with pytest.raises(PreconditionError):
            check("epi_lower", FinitePMF.uniform(Z(4)))

    def test_log_concavity_required(self):
        bimodal = GridDensity([0.0], [4.0], [0.3, 0.05, 0.05, 0.6])
        with pytest.raises(PreconditionError, match="log-concave"):
            check("ruzsa_div_ub", bimodal)
        check("ruzsa_div_ub", bimodal, assume_log_concave=True)

    def test_markov_required(self):
        t = np.zeros((2, 2, 2))
        t[0, 0, 0] = t[1, 0, 1] = 0.5
        with pytest.raises(PreconditionError, match="Markov"):
            check("cond_ruzsa_bound", JointPMF([Z(2)] * 3, t))

    def test_sharp_triangle_finite_only(self):
        g = ParametricDensity.gaussian()
        with pytest.raises(PreconditionError):
            check("ruzsa_triangle_sharp", g, g, g)

    def test_matrices_validated(self):
        with pytest.raises(ValidationError, match="symmetric"):
            check("det_rotfeld", [[1.0, 0.5], [0.0, 1.0]], np.eye(2))
        with pytest.raises(ValidationError, match="positive definite"):
            check("det_rotfeld", [[1.0, 2.0], [2.0, 1.0]], np.eye(2))

    def test_weights_nonzero(self, rng):
        p = gen.random_pmf(Z(5), rng)
        with pytest.raises(PreconditionError):
            check("weighted_sum_lemma", p, p, 0, 1)
        with pytest.raises(PreconditionError):
            check("weighted_sum_theorem", p, p, -1, 1)


class TestFiniteTheorems:
    THEOREMS = ("ruzsa_triangle", "ruzsa_triangle_sharp", "subadditivity", "monotonicity",
                "plunnecke_ruzsa", "submodularity", "cond_reduces", "cond_ruzsa_bound",
                "cond_ruzsa_symmetric", "sum_difference", "doubling_difference_ratio",
                "weighted_sum_lemma", "weighted_sum_theorem", "sumset_triangle")

    @pytest.mark.parametrize("name", THEOREMS)
    @settings(max_examples=25)
    @given(seed=st.integers(0, 2 ** 32 - 1))
    def test_no_violation(self, name, seed):
        args, kw = replay_inputs(name, "finite", seed, 0, 1, m_range=(2, 12))
        r = check(name, *args, **kw)
        assert r.status in (PASS, SKIPPED), r


class TestEnsemble:
    def test_triangle_z16(self):
        s = run_ensemble("ruzsa_triangle", "finite", 1000, seed=3, gen_opts={"m_range": (16, 16)})
        assert s.violations == 0 and s.min_slack >= -1e-9
        assert s.statuses == {PASS: 1000}

    def test_rotfeld(self):
        s = run_ensemble("det_rotfeld", "pd", 1000, seed=4)
        assert s.violations == 0

    def test_deterministic_and_job_independent(self):
        a = run_ensemble("sum_difference", "finite", 40, seed=11)
        b = run_ensemble("sum_difference", "finite", 40, seed=11, n_jobs=2)
        da, db = a.to_dict(), b.to_dict()
        da.pop("elapsed"), db.pop("elapsed")
        assert da == db

    def test_persist_and_replay(self, tmp_path):
        path = tmp_path / "argmin.json"
        s = run_ensemble("subadditivity", "finite", 25, seed=5, persist=path)
        saved = json.loads(path.read_text())
        assert saved["trial"] == s.argmin_trial and saved["digest"] == s.argmin_digest
        args, kw = replay_inputs("subadditivity", "finite", 5, s.argmin_trial, 25)
        r = check("subadditivity", *args, **kw)
        assert r.inputs_digest == s.argmin_digest
        assert r.slack == s.min_slack

    def test_ratio_range_recorded(self):
        s = run_ensemble("doubling_difference_ratio", "logconcave-grid", 10, seed=0)
        assert 0.5 <= s.ratio_min <= s.ratio_max <= 2.0

    def test_bad_trials(self):
        with pytest.raises(ValueError):
            run_ensemble("ruzsa_triangle", "finite", 0)

    def test_generator_incompatible(self):
        with pytest.raises(ValueError):
            run_ensemble("ball_nguyen", "logconcave-grid", 1)
