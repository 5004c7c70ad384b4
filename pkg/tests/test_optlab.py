import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from geomix import optlab
from geomix.core import Distribution, PredictionSet
from geomix.engine import trace
from geomix.mixers import mix_geometric, mix_linear
from geomix.optlab import (
    PredictionLog,
    batch_gradient,
    batch_objective,
    beta_identity_gap,
    convexity_probe,
    grid_minimize_geo,
    grid_minimize_lin,
    optimize_weights,
    project_simplex,
    random_log,
    two_part_dominance,
)
from conftest import sample_text

KINDS = ("geometric", "linear")
RES = 1e-3


def symmetric_log(n=12, a=2):
    # two models that swap roles on alternate steps
    probs, syms = [], []
    for k in range(n):
        good, bad = [0.8, 0.2], [0.3, 0.7]
        probs.append([good, bad] if k % 2 else [bad, good])
        syms.append(0)
    return PredictionLog(np.array(probs), syms)


class TestPredictionLog:
    def test_validation(self):
        with pytest.raises(ValueError):
            PredictionLog(np.full((2, 1, 2), 0.5), [0, 2])
        with pytest.raises(ValueError):
            PredictionLog(np.array([[[0.0, 1.0]]]), [0])
        with pytest.raises(ValueError):
            PredictionLog(np.full((2, 2), 0.5), [0, 1])

    def test_from_trace(self):
        rows = trace(sample_text(40), "geo")
        log = PredictionLog.from_trace(rows)
        assert (log.n, log.m, log.alphabet_size) == (320, 8, 2)
        assert np.array_equal(log.symbols, rows[:, 11].astype(int))


class TestGridOracles:
    def test_indicator(self):
        ps = PredictionSet([Distribution([0.2, 0.3, 0.5]), Distribution([0.6, 0.3, 0.1])])
        for oracle in (grid_minimize_geo, grid_minimize_lin):
            assert np.max(np.abs(oracle(ps, [1, 0], RES).probs - ps.probs[0])) <= RES

    def test_symmetric(self):
        ps = PredictionSet.binary([0.8, 0.2])
        for oracle in (grid_minimize_geo, grid_minimize_lin):
            assert oracle(ps, [1, 1], RES)[1] == pytest.approx(0.5, abs=RES)

    def test_random_agreement(self):
        rng = np.random.default_rng(20)
        for _ in range(40):
            a, m = int(rng.integers(2, 4)), int(rng.integers(1, 5))
            ps = PredictionSet(list(optlab.random_distributions(rng, (m,), a)))
            w = rng.dirichlet(np.ones(m))
            assert np.max(np.abs(mix_geometric(ps, w).probs - grid_minimize_geo(ps, w, RES).probs)) <= 2 * RES
            assert np.max(np.abs(mix_linear(ps, w).probs - grid_minimize_lin(ps, w, RES).probs)) <= 2 * RES

    def test_alphabet_limit(self):
        ps = PredictionSet([Distribution.uniform(4)])
        with pytest.raises(ValueError):
            grid_minimize_geo(ps, [1], RES)


class TestObjective:
    def test_single_step_single_model(self):
        log = PredictionLog(np.array([[[0.3, 0.7]]]), [1])
        for kind in KINDS:
            assert batch_objective(log, [1.0], kind) == pytest.approx(-math.log2(0.7), abs=1e-15)

    def test_constant_model(self):
        rng = np.random.default_rng(21)
        n = 25
        probs = optlab.random_distributions(rng, (n, 3), 3)
        syms = rng.integers(0, 3, n)
        probs[np.arange(n), 1, :] = 0.25 / 2
        probs[np.arange(n), 1, syms] = 0.75
        log = PredictionLog(probs, syms)
        for kind in KINDS:
            assert batch_objective(log, [0, 1, 0], kind) == pytest.approx(n * -math.log2(0.75), abs=1e-12)

    def test_double_entry(self):
        rng = np.random.default_rng(22)
        for _ in range(20):
            log = random_log(rng, int(rng.integers(1, 30)), int(rng.integers(1, 6)), int(rng.integers(2, 5)))
            w = rng.dirichlet(np.ones(log.m))
            for kind, mix in (("geometric", mix_geometric), ("linear", mix_linear)):
                slow = math.fsum(-math.log2(mix(log.step(k), w)[int(log.symbols[k])]) for k in range(log.n))
                assert batch_objective(log, w, kind) == pytest.approx(slow, abs=1e-10)

    def test_many_matches_single(self):
        rng = np.random.default_rng(23)
        log = random_log(rng, 15, 3, 3)
        ws = np.array([rng.dirichlet(np.ones(3)) for _ in range(10)])
        for kind in KINDS:
            many = optlab.batch_objective_many(log, ws, kind)
            single = [batch_objective(log, w, kind) for w in ws]
            assert np.allclose(many, single, atol=1e-10, rtol=0)


class TestGradient:
    def test_identical_models(self):
        p = np.array([[[0.3, 0.7]] * 3] * 5)
        log = PredictionLog(p, [0, 1, 1, 0, 1])
        for kind in KINDS:
            assert np.max(np.abs(batch_gradient(log, [0.2, 0.3, 0.5], kind))) < 1e-13

    def test_finite_differences(self):
        rng = np.random.default_rng(24)
        for _ in range(30):
            log = random_log(rng, int(rng.integers(1, 51)), int(rng.integers(1, 6)), int(rng.integers(2, 5)))
            w = optlab.random_interior(rng, log.m)
            for kind in KINDS:
                assert optlab.gradient_error(log, w, kind) < 1e-6

    def test_zero_at_interior_optimum(self):
        log = symmetric_log()
        for kind in KINDS:
            opt = optimize_weights(log, kind)
            assert np.linalg.norm(batch_gradient(log, opt.w, kind)) < 1e-6

    def test_boundary_rejected(self):
        log = symmetric_log()
        with pytest.raises(ValueError):
            batch_gradient(log, [1.0, 0.0], "geometric")


class TestOptimize:
    def test_dominant_model(self):
        probs = np.array([[[0.1, 0.9], [0.9, 0.1]]] * 10)
        log = PredictionLog(probs, [1] * 10)
        grid_w, _ = optlab.grid_objective_min(log, "geometric", 1e-4)
        for kind in KINDS:
            w = optimize_weights(log, kind).w
            assert np.max(np.abs(w - [1, 0])) < 1e-3
            assert np.max(np.abs(w - grid_w)) < 1e-3

    def test_symmetric_instance(self):
        log = symmetric_log()
        for kind in KINDS:
            assert np.allclose(optimize_weights(log, kind).w, [0.5, 0.5], atol=1e-6)

    def test_beats_grid(self):
        rng = np.random.default_rng(25)
        for _ in range(8):
            log = random_log(rng, int(rng.integers(1, 20)), int(rng.integers(1, 4)), int(rng.integers(2, 4)))
            for kind in KINDS:
                opt = optimize_weights(log, kind)
                _, best = optlab.grid_objective_min(log, kind, RES)
                assert opt.objective <= best + 1e-6

    def test_beats_random_points_and_permutes(self):
        rng = np.random.default_rng(26)
        for _ in range(5):
            log = random_log(rng, 30, 4, 3)
            perm = rng.permutation(4)
            for kind in KINDS:
                opt = optimize_weights(log, kind)
                for _ in range(100):
                    assert opt.objective <= batch_objective(log, rng.dirichlet(np.ones(4)), kind) + 1e-9
                permuted = optimize_weights(log.permuted(perm), kind)
                assert np.allclose(permuted.w, opt.w[perm], atol=1e-5)

    def test_single_model(self):
        log = random_log(np.random.default_rng(27), 5, 1, 2)
        assert optimize_weights(log, "linear").w.tolist() == [1.0]

    @given(st.lists(st.floats(-3, 3), min_size=1, max_size=8), st.sampled_from([0.0, 1e-12, 0.01]))
    def test_projection(self, v, floor):
        w = project_simplex(np.array(v), floor)
        assert abs(w.sum() - 1) < 1e-12 and np.all(w >= floor - 1e-15)


class TestConvexity:
    def test_single_model_degenerate(self):
        rep = convexity_probe(random_log(np.random.default_rng(28), 10, 1, 3), "geometric", 5, 0)
        assert rep.dimension == 0 and rep.degenerate == 5 and rep.violations == 0

    def test_random_instances(self):
        rng = np.random.default_rng(29)
        for _ in range(60):
            log = random_log(rng, int(rng.integers(1, 51)), int(rng.integers(2, 6)), int(rng.integers(2, 5)))
            for kind in KINDS:
                rep = convexity_probe(log, kind, 2, rng)
                assert rep.violations == 0, rep.to_dict()
                assert rep.min_hessian_eigenvalue > -1e-9

    def test_identical_models_flagged(self):
        p = np.array([[[0.3, 0.7]] * 3] * 8)
        log = PredictionLog(p, [0, 1] * 4)
        for kind in KINDS:
            rep = convexity_probe(log, kind, 4, 1)
            assert rep.degenerate == 4 and rep.violations == 0

    def test_trials_must_be_positive(self):
        with pytest.raises(ValueError):
            convexity_probe(symmetric_log(), "geometric", 0)

    def test_hessians_agree(self):
        rng = np.random.default_rng(30)
        log = random_log(rng, 20, 4, 3)
        w = optlab.random_interior(rng, 4)
        for kind in KINDS:
            assert np.allclose(optlab.numeric_hessian(log, w, kind), optlab.analytic_hessian(log, w, kind), atol=1e-5)


class TestDominance:
    def test_single_model_equality(self):
        rep = two_part_dominance(random_log(np.random.default_rng(31), 6, 1, 2), [1.0])
        assert rep.holds and not rep.strict and rep.mixture_bits == rep.two_part_bits

    def test_uniform_prior_strict(self):
        probs = np.array([[[0.1, 0.9], [0.5, 0.5], [0.6, 0.4]]] * 5)
        rep = two_part_dominance(PredictionLog(probs, [1] * 5), np.full(3, 1 / 3))
        assert rep.holds and rep.strict

    def test_random(self):
        rng = np.random.default_rng(32)
        for _ in range(300):
            log = random_log(rng, int(rng.integers(1, 11)), int(rng.integers(1, 5)), 3)
            assert two_part_dominance(log, rng.dirichlet(np.ones(log.m))).holds

    def test_zero_prior_entries(self):
        log = random_log(np.random.default_rng(33), 4, 2, 2)
        assert two_part_dominance(log, [1.0, 0.0]).holds

    def test_bad_prior(self):
        with pytest.raises(ValueError):
            two_part_dominance(symmetric_log(), [0.7, 0.7])


def test_beta_identity():
    rng = np.random.default_rng(34)
    for _ in range(20):
        log = random_log(rng, int(rng.integers(1, 51)), int(rng.integers(1, 6)), int(rng.integers(2, 5)))
        assert beta_identity_gap(log) <= 1e-12
        assert beta_identity_gap(log, rng.dirichlet(np.ones(log.m))) <= 1e-12


class TestSuites:
    def test_expand(self):
        assert optlab.expand_suites(["all"]) == list(optlab.SUITES)
        assert optlab.expand_suites(["dominance", "dominance"]) == ["dominance"]
        with pytest.raises(ValueError):
            optlab.expand_suites(["nope"])

    def test_deterministic_report(self):
        a = json.dumps(optlab.verification_report(["paq-equiv", "dominance"], 20, 5), sort_keys=True)
        b = json.dumps(optlab.verification_report(["paq-equiv", "dominance"], 20, 5), sort_keys=True)
        assert a == b and json.loads(a)["violations"] == 0

    def test_zero_trials(self):
        with pytest.raises(ValueError):
            optlab.run_suite("paq-equiv", 0)
