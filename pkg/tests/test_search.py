import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from ruzsa.groups import GroupSpec
from ruzsa.io import read_density
from ruzsa.errors import ValidationError
from ruzsa.search import (
    MAX_SIGMA_MINUS,
    MAX_SIGMA_PLUS,
    METHODS,
    MIN_SLACK,
    LogConcaveGridSpace,
    ParametricSpace,
    SearchProblem,
    SimplexSpace,
    export_best,
    is_concave,
    load_problem,
    optimize,
    project_concave,
    project_simplex,
)

vectors = arrays(np.float64, st.integers(1, 40), elements=st.floats(-50, 50))


class TestProjections:
    @given(vectors)
    def test_simplex_kkt(self, v):
        p = project_simplex(v)
        assert p.min() >= 0 and p.sum() == pytest.approx(1.0, abs=1e-12)
        # optimality: v - p is constant (theta) on the support and v <= theta off it
        theta = (v - p)[p > 0]
        assert np.ptp(theta) <= 1e-9
        assert np.all(v[p == 0] <= theta[0] + 1e-9)

    @given(vectors)
    def test_simplex_idempotent(self, v):
        p = project_simplex(v)
        np.testing.assert_allclose(project_simplex(p), p, atol=1e-12)

    @given(vectors)
    def test_concave_projection(self, v):
        c = project_concave(v)
        assert is_concave(c, 1e-9)
        np.testing.assert_allclose(project_concave(c), c, atol=1e-9)
        assert c[0] == v[0] and c[-1] == pytest.approx(v[-1], abs=1e-9)

    def test_concave_input_unchanged(self):
        phi = -np.linspace(-2, 2, 30) ** 2
        np.testing.assert_allclose(project_concave(phi), phi, atol=1e-12)


class TestSpaces:
    @pytest.mark.parametrize("space", [
        LogConcaveGridSpace(16, 8),
        SimplexSpace(GroupSpec.cyclic(5), 2),
        ParametricSpace("gamma", {"shape": (1.0, 4.0)}),
    ])
    def test_iterates_feasible(self, space, rng):
        x = space.random_point(rng)
        for _ in range(20):
            x = space.project(space.propose(x, rng, 0.5))
            assert space.is_feasible(x)

    def test_grid_decode_is_log_concave(self, rng):
        space = LogConcaveGridSpace(16, 8)
        (g,) = space.decode(space.random_point(rng))
        assert g.masses.size == 15 * 8 and g.is_log_concave()
        assert space.decode(space.random_point(rng), refine=2)[0].masses.size == 15 * 16

    def test_simplex_decode(self, rng):
        ps = SimplexSpace(GroupSpec.cyclic(4), 3).decode(rng.normal(size=12))
        assert len(ps) == 3 and all(abs(p.probs.sum() - 1) < 1e-12 for p in ps)

    def test_parametric_box(self):
        s = ParametricSpace("gamma", {"shape": (1.0, 4.0)})
        assert s.project(np.array([9.0]))[0] == 4.0
        assert not s.is_feasible(np.array([0.5]))

    def test_bad_knots(self):
        with pytest.raises(ValidationError):
            LogConcaveGridSpace(1)


class TestOptimize:
    @pytest.mark.parametrize("method", METHODS)
    def test_trace_monotone_and_budgeted(self, method):
        prob = SearchProblem(MAX_SIGMA_MINUS, LogConcaveGridSpace(12, 8), cells=256)
        t = optimize(prob, method, restarts=2, seed=1, max_evals=80)
        assert np.all(np.diff(t.values) >= 0)
        assert t.evaluations <= 80 + 2
        assert t.best_value == pytest.approx(max(t.values))
        assert 1.0 <= t.best_value <= 2.0 + 5e-3
        assert t.confirmed_violation is None

    def test_deterministic(self):
        prob = SearchProblem(MAX_SIGMA_PLUS, LogConcaveGridSpace(10, 8), cells=256)
        a = optimize(prob, "simulated-annealing", restarts=2, seed=9, max_evals=40).to_dict()
        b = optimize(prob, "simulated-annealing", restarts=2, seed=9, max_evals=40).to_dict()
        a.pop("wall_clock"), b.pop("wall_clock")
        assert a == b

    def test_sigma_plus_no_violation(self):
        prob = SearchProblem(MAX_SIGMA_PLUS, LogConcaveGridSpace(16, 8), cells=256)
        t = optimize(prob, "projected-gradient", restarts=2, seed=0, max_evals=150)
        assert t.confirmed_violation is False and t.best_value <= 2.0

    def test_gamma_shape_maximum_at_exponential(self):
        prob = SearchProblem(MAX_SIGMA_MINUS, ParametricSpace("gamma", {"shape": (1.0, 6.0)}))
        t = optimize(prob, "nelder-mead", restarts=2, seed=0, max_evals=60)
        assert t.best_x[0] == pytest.approx(1.0, abs=0.05)
        assert t.best_value == pytest.approx(2.0, abs=5e-3)

    def test_min_slack_finds_no_counterexample(self):
        prob = SearchProblem(MIN_SLACK, SimplexSpace(GroupSpec.cyclic(4), 3), "ruzsa_triangle")
        t = optimize(prob, "projected-gradient", restarts=2, seed=2, max_evals=300)
        assert np.all(np.diff(t.values) <= 0)
        assert t.best_value >= -1e-9 and t.confirmed_violation is False

    def test_unknown_method(self):
        prob = SearchProblem(MAX_SIGMA_MINUS, LogConcaveGridSpace(8, 4))
        with pytest.raises(ValidationError):
            optimize(prob, "gradient-ascent")

    def test_exports(self, tmp_path):
        space = SimplexSpace(GroupSpec.cyclic(3), 3)
        prob = SearchProblem(MIN_SLACK, space, "monotonicity")
        t = optimize(prob, "nelder-mead", restarts=1, seed=0, max_evals=30)
        paths = export_best(prob, t, tmp_path / "best.json")
        assert [p.name for p in paths] == ["best_0.json", "best_1.json", "best_2.json"]
        np.testing.assert_allclose(read_density(paths[0]).probs, space.decode(t.best_x)[0].probs)
        data = json.loads(t.write_json(tmp_path / "t.json").read_text())
        assert data["best_value"] == t.best_value
        rows = t.write_csv(tmp_path / "t.csv").read_text().splitlines()
        assert rows[0] == "iteration,objective" and len(rows) == len(t.values) + 1


class TestProblemFiles:
    def test_defaults(self):
        prob, opts = load_problem({})
        assert prob.objective == MAX_SIGMA_MINUS and isinstance(prob.space, LogConcaveGridSpace)
        assert (prob.space.knots, prob.space.cells_per_knot) == (64, 16)
        assert opts == {"method": "projected-gradient", "restarts": 8, "max_evals": 10_000,
                        "time_budget": 600.0, "seed": 0}

    def test_min_slack_simplex(self):
        prob, _ = load_problem({"objective": "min_slack", "check": "subadditivity",
                                "space": {"kind": "simplex", "moduli": [6], "k": 3}})
        assert prob.space.dim == 18 and prob.check_name == "subadditivity"

    @pytest.mark.parametrize("bad", [
        [],
        {"method": "newton"},
        {"objective": "max_entropy"},
        {"objective": "min_slack"},
        {"objective": "min_slack", "check": "nope"},
        {"space": {"kind": "sphere"}},
        {"space": {"kind": "simplex"}},
        {"restarts": "many"},
    ])
    def test_rejects(self, bad):
        with pytest.raises(Exception) as exc:
            load_problem(bad)
        assert isinstance(exc.value, (ValidationError, KeyError))
