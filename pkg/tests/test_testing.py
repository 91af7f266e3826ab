import numpy as np
import pytest

from graphonlab import (
    Activation,
    FamilySpec,
    GCNConfig,
    HypothesisViolated,
    InvalidModel,
    ShapeMismatch,
    clopper_pearson,
    embedding_distance_experiment,
    error_not_below_floor,
    error_probability_floor,
    expected_sorted_profile,
    family_generate,
    fit_decay_exponent,
    lecam_error_lower,
    monte_carlo_error,
    nearest_profile_test,
    tv_perturbed,
)
from graphonlab.seeding import derive_seed

from helpers import SBM_BASE, SBM_SEPARATED


def monte_carlo_tv(m0, m1, eps, n_samples, seed):
    """Oracle: TV between uniform cubes by sampling from the first law."""
    rng = np.random.default_rng(seed)
    m0 = np.asarray(m0, dtype=float).ravel()
    m1 = np.asarray(m1, dtype=float).ravel()
    x = m0 + rng.uniform(-eps, eps, size=(n_samples, m0.size))
    outside = (np.abs(x - m1) > eps).any(axis=1)
    return outside.mean()


class TestTVPerturbed:
    def test_equal_matrices(self):
        m = np.array([[0.1, 0.2], [0.3, 0.4]])
        res = tv_perturbed(m, m, 0.05)
        assert res.tv == 0.0
        assert res.clipped_dims == 0
        assert res.log_overlap == 0.0

    def test_clipped_coordinate_forces_one(self):
        res = tv_perturbed([0.0, 0.0], [0.0, 1.0], 0.5)
        assert res.tv == 1.0
        assert res.clipped_dims == 1

    def test_scalar_half_overlap(self):
        res = tv_perturbed([0.0], [1.0], 1.0)
        assert res.tv == 0.5

    def test_consistency_invariant(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            m0 = rng.normal(size=4)
            m1 = m0 + rng.uniform(-0.02, 0.02, size=4)
            res = tv_perturbed(m0, m1, 0.05)
            if res.clipped_dims == 0:
                assert res.tv == pytest.approx(1 - np.exp(res.log_overlap), abs=1e-12)

    def test_symmetry_and_monotone_in_eps(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            m0 = rng.normal(size=5)
            m1 = m0 + rng.uniform(-0.1, 0.1, size=5)
            a = tv_perturbed(m0, m1, 0.2).tv
            b = tv_perturbed(m1, m0, 0.2).tv
            assert a == pytest.approx(b, abs=1e-15)
            wider = tv_perturbed(m0, m1, 0.4).tv
            assert wider <= a + 1e-15

    def test_against_monte_carlo_oracle(self):
        rng = np.random.default_rng(11)
        for i in range(5):
            m0 = rng.normal(size=3) * 0.1
            m1 = m0 + rng.uniform(-0.08, 0.08, size=3)
            exact = tv_perturbed(m0, m1, 0.05).tv
            estimate = monte_carlo_tv(m0, m1, 0.05, 200_000, seed=i)
            assert abs(exact - estimate) < 0.01

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatch):
            tv_perturbed(np.zeros(3), np.zeros(4), 0.1)

    def test_underflow_safe_reporting(self):
        # thousands of coordinates, each shaving a bit of overlap
        m0 = np.zeros(5000)
        m1 = np.full(5000, 0.09)
        res = tv_perturbed(m0, m1, 0.05)
        assert res.tv == 1.0 or res.tv > 0.999999
        assert np.isfinite(res.log_overlap) or res.clipped_dims > 0


class TestFloors:
    def test_lecam_endpoints(self):
        assert lecam_error_lower(0.0) == 0.5
        assert lecam_error_lower(1.0) == 0.0
        assert lecam_error_lower(0.8) == pytest.approx(0.1)

    def test_lecam_domain(self):
        with pytest.raises(InvalidModel):
            lecam_error_lower(1.5)

    def test_zero_delta_formula(self):
        n = 100
        eps = 10.0 / n
        assert error_probability_floor(0.0, eps, n) == pytest.approx(np.exp(-0.1))

    def test_positive_delta_formula(self):
        n = 50
        delta = 0.2
        eps = delta / n
        assert error_probability_floor(delta, eps, n) == pytest.approx(0.5**n)

    def test_hypothesis_boundary(self):
        n = 50
        delta = 0.2
        with pytest.raises(HypothesisViolated):
            error_probability_floor(delta, delta / (2 * n), n)

    def test_const_c_scales_zero_regime(self):
        n = 100
        eps = 1.0 / n
        assert error_probability_floor(0.0, eps, n, const_c=2.0) == pytest.approx(
            np.exp(-2.0)
        )

    def test_floor_consistency_helper(self):
        # 50 errors in 100 trials is not significantly below a floor of 0.4
        assert error_not_below_floor(50, 100, 0.4)
        # but 5 errors in 400 trials is significantly below 0.4
        assert not error_not_below_floor(5, 400, 0.4)
        assert error_not_below_floor(0, 10, 0.0)


class TestClopperPearson:
    def test_edge_cases(self):
        lo, hi = clopper_pearson(0, 20)
        assert lo == 0.0 and 0 < hi < 0.25
        lo, hi = clopper_pearson(20, 20)
        assert hi == 1.0 and lo > 0.75

    def test_coverage_shape(self):
        lo, hi = clopper_pearson(10, 20)
        assert lo < 0.5 < hi


class TestNearestProfile:
    def test_exact_profile_decides_zero(self):
        w0 = SBM_BASE.to_step_graphon()
        w1 = SBM_SEPARATED.to_step_graphon()
        n = 100
        h = expected_sorted_profile(w0, n)
        assert nearest_profile_test(h, w0, w1, n) == 0

    def test_role_swap_flips_decision(self):
        w0 = SBM_BASE.to_step_graphon()
        w1 = SBM_SEPARATED.to_step_graphon()
        n = 100
        h = expected_sorted_profile(w1, n)
        assert nearest_profile_test(h, w0, w1, n) == 1
        assert nearest_profile_test(h, w1, w0, n) == 0

    def test_permutation_invariance(self):
        w0 = SBM_BASE.to_step_graphon()
        w1 = SBM_SEPARATED.to_step_graphon()
        n = 60
        rng = np.random.default_rng(8)
        h = expected_sorted_profile(w0, n) + rng.normal(0, 1e-4, n)
        d1 = nearest_profile_test(h, w0, w1, n)
        d2 = nearest_profile_test(h[rng.permutation(n)], w0, w1, n)
        assert d1 == d2

    def test_tie_breaks_toward_zero(self):
        w = SBM_BASE.to_step_graphon()
        n = 40
        h = expected_sorted_profile(w, n)
        assert nearest_profile_test(h, w, w, n) == 0

    def test_profile_structure(self):
        w = SBM_BASE.to_step_graphon()
        n = 10
        prof = expected_sorted_profile(w, n)
        assert prof.shape == (n,)
        assert (np.diff(prof) <= 1e-15).all()
        # block values: d_i/(n D) with d = (.4,.3), D = .35
        np.testing.assert_allclose(prof[:5], 0.4 / (n * 0.35))
        np.testing.assert_allclose(prof[5:], 0.3 / (n * 0.35))


class TestMonteCarlo:
    def test_same_model_is_chance_level(self):
        w = SBM_BASE.to_step_graphon()
        cfg = GCNConfig(depth=8)
        report = monte_carlo_error(w, w, 40, cfg, eps_res=0.01, trials=200, seed=5)
        assert report.ci_low <= 0.5 <= report.ci_high
        assert report.trials == 200
        assert len(report.outcomes) == 200

    def test_separated_pair_beats_chance(self):
        w0 = SBM_BASE.to_step_graphon()
        w1 = SBM_SEPARATED.to_step_graphon()
        n = 200
        cfg = GCNConfig(depth=32)
        delta = 1.0 / 14.0
        report = monte_carlo_error(
            w0, w1, n, cfg, eps_res=delta / (4 * n), trials=60, seed=9
        )
        assert report.error_rate <= 0.15
        assert report.bounds.regime == "delta_positive"

    def test_deterministic_replay(self):
        w0 = SBM_BASE.to_step_graphon()
        w1 = SBM_SEPARATED.to_step_graphon()
        cfg = GCNConfig(depth=6)
        a = monte_carlo_error(w0, w1, 30, cfg, 0.01, trials=25, seed=77)
        b = monte_carlo_error(w0, w1, 30, cfg, 0.01, trials=25, seed=77)
        assert a == b

    def test_parallel_workers_reproduce_serial(self):
        w0 = SBM_BASE.to_step_graphon()
        w1 = SBM_SEPARATED.to_step_graphon()
        cfg = GCNConfig(depth=5)
        serial = monte_carlo_error(w0, w1, 25, cfg, 0.01, trials=12, seed=3, n_workers=1)
        parallel = monte_carlo_error(w0, w1, 25, cfg, 0.01, trials=12, seed=3, n_workers=2)
        assert serial == parallel

    def test_trial_rows_schema(self):
        w = SBM_BASE.to_step_graphon()
        report = monte_carlo_error(w, w, 40, GCNConfig(depth=3), 0.05, trials=5, seed=1)
        rows = list(report.trial_rows())
        assert len(rows) == 5
        assert set(rows[0]) == {"trial", "seed", "label", "decision", "distance"}

    def test_report_json(self):
        import json

        w = SBM_BASE.to_step_graphon()
        report = monte_carlo_error(w, w, 40, GCNConfig(depth=3), 0.05, trials=4, seed=2)
        doc = json.loads(report.to_json())
        assert doc["trials"] == 4
        assert 0.0 <= doc["lecam_floor"] <= 0.5

    def test_rejects_bad_args(self):
        w = SBM_BASE.to_step_graphon()
        with pytest.raises(InvalidModel):
            monte_carlo_error(w, w, 40, GCNConfig(depth=3), 0.05, trials=0, seed=2)
        with pytest.raises(InvalidModel):
            monte_carlo_error(w, w, 40, GCNConfig(depth=3), -0.05, trials=2, seed=2)


class TestDistanceExperiment:
    def test_same_model_shared_randomness_is_zero(self):
        w = SBM_BASE.to_step_graphon()
        stats = embedding_distance_experiment(
            w, w, 40, GCNConfig(depth=6), trials=10, seed=4, share_edge_randomness=True
        )
        assert stats.median == 0.0
        assert stats.p95 == 0.0

    def test_family_pair_small_distance_regime(self):
        w0 = SBM_BASE.to_step_graphon()
        w1 = family_generate(FamilySpec(SBM_BASE, 0.05)).to_step_graphon()
        stats = embedding_distance_experiment(
            w0, w1, 150, GCNConfig(depth=30), trials=20, seed=6
        )
        assert stats.regime == "delta_zero"
        assert stats.delta <= 1e-12

    def test_separated_pair_regime_and_envelope(self):
        w0 = SBM_BASE.to_step_graphon()
        w1 = SBM_SEPARATED.to_step_graphon()
        stats = embedding_distance_experiment(
            w0, w1, 150, GCNConfig(depth=30), trials=20, seed=6
        )
        assert stats.regime == "delta_positive"
        assert stats.envelope == pytest.approx(
            (1 / 14) / 150 * (1 + 1 / np.sqrt(150))
        )

    def test_rejects_sigmoid(self):
        w = SBM_BASE.to_step_graphon()
        with pytest.raises(InvalidModel):
            embedding_distance_experiment(
                w, w, 30, GCNConfig(depth=3, activation=Activation("sigmoid")),
                trials=2, seed=1,
            )

    def test_fit_decay_exponent(self):
        n = np.array([100, 200, 400])
        values = 3.0 * n.astype(float) ** -1.5
        assert fit_decay_exponent(n, values) == pytest.approx(-1.5)
