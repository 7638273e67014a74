import numpy as np
import pytest

from cxtlms.scenario import (
    ScenarioConfig,
    gen_colored_noise,
    moving_average,
    mse_curve,
    pa_nonlinearity,
    run_monte_carlo,
    simulate_run,
    simulate_target,
    synth_duplexer,
    to_db,
)


def lag1(x):
    return float(np.real(np.vdot(x[:-1], x[1:])) / np.vdot(x, x).real)


class TestColoredNoise:
    def test_white_when_a_is_zero(self):
        rng = np.random.default_rng(5)
        nu = (rng.standard_normal(100) + 1j * rng.standard_normal(100)) / np.sqrt(2)
        np.testing.assert_allclose(gen_colored_noise(0.0, 100, 5), nu, rtol=1e-15)

    def test_unit_variance(self):
        x = gen_colored_noise(0.9, 100_000, 1)
        assert np.mean(np.abs(x) ** 2) == pytest.approx(1.0, rel=0.05)

    @pytest.mark.parametrize("a", [0.0, 0.5, 0.9])
    def test_lag_one_correlation(self, a):
        assert lag1(gen_colored_noise(a, 100_000, 2)) == pytest.approx(a, abs=0.02)

    def test_invalid_coefficient(self):
        with pytest.raises(ValueError):
            gen_colored_noise(1.0, 10)


@pytest.mark.parametrize("x, y", [(0, 0), (1, 0.5), (1j, -0.5), (-2, 4 / 3)])
def test_pa(x, y):
    assert pa_nonlinearity(x) == pytest.approx(y)


class TestDuplexer:
    @pytest.mark.parametrize("seed", range(5))
    def test_unit_norm(self, seed):
        assert np.linalg.norm(synth_duplexer(16, seed).taps) == pytest.approx(1.0, rel=1e-14)

    def test_deterministic(self):
        np.testing.assert_array_equal(synth_duplexer(16, 3).taps, synth_duplexer(16, 3).taps)

    def test_decay(self):
        taps = np.array([synth_duplexer(16, s).taps for s in range(100)])
        assert np.mean(np.abs(taps[:, 8])) < np.mean(np.abs(taps[:, 0]))


class TestTarget:
    def test_noiseless(self):
        x = gen_colored_noise(0.9, 500, 0)
        d, y = simulate_target(x, synth_duplexer(16, 0), np.inf, 1)
        np.testing.assert_array_equal(y, d)

    def test_identity_filter(self):
        x = gen_colored_noise(0.9, 500, 0)
        d, _ = simulate_target(x, np.eye(16)[0], np.inf)
        np.testing.assert_allclose(d, pa_nonlinearity(x), rtol=1e-15)

    def test_convolution_uses_past_samples(self):
        x = gen_colored_noise(0.0, 50, 0)
        h = np.zeros(4, complex)
        h[2] = 1j
        d, _ = simulate_target(x, h, np.inf)
        np.testing.assert_allclose(d[2:], 1j * pa_nonlinearity(x[:-2]))
        assert not d[:2].any()

    def test_snr(self):
        x = gen_colored_noise(0.9, 100_000, 0)
        d, y = simulate_target(x, synth_duplexer(16, 0), 10.0, 7)
        snr = 10 * np.log10(np.mean(np.abs(d) ** 2) / np.mean(np.abs(y - d) ** 2))
        assert snr == pytest.approx(10.0, abs=0.3)


class TestMse:
    def test_floor(self):
        d = np.ones((2, 5), complex)
        np.testing.assert_array_equal(mse_curve(d, d), -320.0)

    def test_unit_error(self):
        np.testing.assert_allclose(mse_curve(np.ones(4), np.exp(1j * np.arange(4)) + 1), 0.0, atol=1e-12)

    def test_average_over_runs(self):
        d = np.zeros((2, 1))
        yhat = np.array([[1.0], [np.sqrt(3)]])
        assert mse_curve(d, yhat)[0] == pytest.approx(10 * np.log10(2))

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            mse_curve(np.zeros((2, 3)), np.zeros((1, 3)))

    def test_to_db(self):
        np.testing.assert_array_equal(to_db([1.0, 0.1, 0.0]), [0.0, -10.0, -320.0])

    def test_moving_average(self):
        np.testing.assert_allclose(moving_average([1, 3, 5, 7], 2), [1, 2, 4, 6])
        np.testing.assert_array_equal(moving_average([1, 2], 1), [1, 2])


class TestConfig:
    def test_defaults(self):
        cfg = ScenarioConfig()
        assert (cfg.n_taps, cfg.rank, cfg.order, cfg.n_runs, cfg.snr_db) == (16, 10, 2, 20, 10)
        assert cfg.mu_tensor == {"tlms2r": 0.009, "ttlms": 0.009, "ctlms": 0.075}
        assert cfg.mu_lms == {"tlms2r": 0.009, "ttlms": 0.005, "ctlms": 0.009}
        assert cfg.eps == 1e-12

    @pytest.mark.parametrize("kw", [{"order": 3}, {"ar_coeff": 1.0}, {"n_runs": 0}, {"n_bins": 7}])
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            ScenarioConfig(**kw)


class TestMonteCarlo:
    def test_zero_estimate_accounts_for_energy(self):
        cfg = ScenarioConfig(n_samples=2000, n_runs=1, snr_db=np.inf)
        res = simulate_run(cfg, 0, ("ctlms",))
        curve = mse_curve(res.desired, np.zeros_like(res.desired))
        assert np.mean(10 ** (curve / 10)) == pytest.approx(np.mean(np.abs(res.desired) ** 2))

    def test_shared_streams_and_reproducibility(self):
        cfg = ScenarioConfig(n_samples=800, n_runs=2)
        a = simulate_run(cfg, 1)
        b = simulate_run(cfg, 1)
        np.testing.assert_array_equal(a.desired, b.desired)
        for arch in a.estimates:
            np.testing.assert_array_equal(a.estimates[arch], b.estimates[arch])
        assert not np.array_equal(simulate_run(cfg, 0).desired, a.desired)

    def test_jobs_do_not_change_results(self):
        cfg = ScenarioConfig(n_samples=600, n_runs=2)
        one = run_monte_carlo(cfg, jobs=1)
        two = run_monte_carlo(cfg, jobs=2)
        for arch in one.archs:
            np.testing.assert_array_equal(one.mse_db[arch], two.mse_db[arch])
