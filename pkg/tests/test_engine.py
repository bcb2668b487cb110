import numpy as np
import pytest

from sigclust import (
    DataMatrix,
    InvalidConfigError,
    InvalidSpectraError,
    NullSpectrum,
    TestConfig,
    empirical_p,
    gaussian_p,
    run_test,
    run_tests,
    simulate_null_cis,
    simulate_null_cis_combined,
)


def make_config(**kwargs):
    kwargs.setdefault("n_sim", 100)
    kwargs.setdefault("master_seed", 1234)
    return TestConfig(**kwargs)


class TestPValueHelpers:
    def test_empirical_formula(self):
        null = np.array([0.1, 0.2, 0.3, 0.4])
        assert empirical_p(0.25, null) == (1 + 2) / 5
        assert empirical_p(0.0, null) == 1 / 5  # floor, never zero
        assert empirical_p(1.0, null) == 1.0

    def test_gaussian_at_mean_is_half(self):
        assert gaussian_p(0.5, 0.5, 0.1) == 0.5

    def test_gaussian_open_interval(self):
        assert 0.0 < gaussian_p(-100.0, 0.5, 0.001) < 1.0
        assert 0.0 < gaussian_p(100.0, 0.5, 0.001) < 1.0

    def test_gaussian_zero_sd_degenerate(self):
        assert gaussian_p(0.3, 0.3, 0.0) == 0.5
        assert gaussian_p(0.2, 0.3, 0.0) < 0.5 < gaussian_p(0.4, 0.3, 0.0)


class TestSimulateNullCis:
    def test_range_and_length(self):
        spec = NullSpectrum(method="true", eigenvalues=np.array([1.0]))
        cis = simulate_null_cis(spec, n=4, config=make_config())
        assert cis.shape == (100,)
        assert np.all((cis >= 0.0) & (cis <= 1.0))

    def test_deterministic(self):
        spec = NullSpectrum(method="true", eigenvalues=np.array([1.0]))
        a = simulate_null_cis(spec, n=6, config=make_config())
        b = simulate_null_cis(spec, n=6, config=make_config())
        np.testing.assert_array_equal(a, b)

    def test_worker_count_does_not_change_results(self):
        lam = np.sort(np.random.default_rng(0).uniform(0.5, 5.0, 8))[::-1]
        spec = NullSpectrum(method="true", eigenvalues=lam)
        serial = simulate_null_cis(spec, n=12, config=make_config())
        parallel = simulate_null_cis(spec, n=12, config=make_config(workers=3))
        np.testing.assert_array_equal(serial, parallel)

    def test_mean_tracks_population_value(self):
        # Spiked spectrum: the simulated indices concentrate near the
        # population value of the optimal split, with finite-sample bias.
        from sigclust import theoretical_ci

        lam = np.r_[100.0, np.ones(999)]
        spec = NullSpectrum(method="true", eigenvalues=lam)
        cis = simulate_null_cis(spec, n=100, config=make_config())
        assert abs(cis.mean() - theoretical_ci(lam)) < 0.03


class TestCombined:
    def test_equal_spectra_match_single_run(self):
        lam = np.array([4.0, 2.0, 1.0, 1.0])
        a = NullSpectrum(method="hard", eigenvalues=lam, sigma_n_sq=1.0)
        b = NullSpectrum(method="soft", eigenvalues=lam, sigma_n_sq=1.0, tau=0.0)
        config = make_config()
        combined = simulate_null_cis_combined(a, b, n=10, config=config)
        single = simulate_null_cis(a, n=10, config=config)
        np.testing.assert_array_equal(combined, single)

    def test_min_property_exact(self):
        hard = NullSpectrum(
            method="hard", eigenvalues=np.array([9.0, 2.0, 1.0]), sigma_n_sq=1.0
        )
        soft = NullSpectrum(
            method="soft", eigenvalues=np.array([6.0, 1.5, 1.0]), sigma_n_sq=1.0, tau=3.0
        )
        config = make_config()
        combined = simulate_null_cis_combined(hard, soft, n=15, config=config)
        hard_only = simulate_null_cis(hard, n=15, config=config)
        soft_only = simulate_null_cis(soft, n=15, config=config)
        np.testing.assert_array_equal(combined, np.minimum(hard_only, soft_only))

    def test_dimension_mismatch(self):
        a = NullSpectrum(method="hard", eigenvalues=np.array([2.0, 1.0]), sigma_n_sq=1.0)
        b = NullSpectrum(method="soft", eigenvalues=np.array([2.0]), sigma_n_sq=1.0, tau=0.0)
        with pytest.raises(InvalidSpectraError):
            simulate_null_cis_combined(a, b, n=5, config=make_config())


class TestRunTest:
    def test_report_invariants(self):
        rng = np.random.default_rng(10)
        x = DataMatrix(rng.normal(size=(8, 25)))
        report = run_test(x, make_config(method="combined"))
        null = report.null_cis
        assert report.p_empirical == (1 + np.count_nonzero(null <= report.ci_observed)) / 101
        assert 0.0 < report.p_empirical <= 1.0
        assert 0.0 < report.p_gaussian < 1.0
        assert np.all((null >= 0.0) & (null <= 1.0))
        assert isinstance(report.spectrum_used, tuple)
        assert report.seed == 1234
        assert report.observed_mode == "two-means"

    def test_byte_determinism_of_reports(self):
        rng = np.random.default_rng(11)
        x = DataMatrix(rng.normal(size=(6, 20)))
        a = run_test(x, make_config(method="hard"))
        b = run_test(x, make_config(method="hard"))
        np.testing.assert_array_equal(a.null_cis, b.null_cis)
        assert a.ci_observed == b.ci_observed
        assert a.p_empirical == b.p_empirical
        assert a.p_gaussian == b.p_gaussian

    def test_empirical_floor_when_observed_below_all(self):
        # Two far blobs: the observed index sits below every null index.
        rng = np.random.default_rng(12)
        x = np.hstack([rng.normal(size=(2, 10)), rng.normal(size=(2, 10)) + 200.0])
        report = run_test(DataMatrix(x), make_config(method="hard", n_sim=999))
        assert report.p_empirical == 1.0 / 1000.0

    def test_sample_equals_hard_when_no_floor_active(self):
        # Heavy-tailed entries make the MAD-based noise level undershoot
        # every sample eigenvalue, so thresholding leaves the spectrum
        # unchanged and the null runs coincide.
        rng = np.random.default_rng(13)
        x = DataMatrix(rng.laplace(size=(3, 300)))
        reports = run_tests(x, make_config(method="sample"), ("sample", "hard"))
        hard_spec = reports["hard"].spectrum_used
        sample_spec = reports["sample"].spectrum_used
        np.testing.assert_array_equal(hard_spec.eigenvalues, sample_spec.eigenvalues)
        np.testing.assert_array_equal(
            reports["sample"].null_cis, reports["hard"].null_cis
        )

    def test_combined_arms_share_draws_with_single_methods(self):
        rng = np.random.default_rng(14)
        x = DataMatrix(rng.normal(size=(30, 12)))
        reports = run_tests(
            x, make_config(method="combined"), ("hard", "soft", "combined")
        )
        np.testing.assert_array_equal(
            reports["combined"].null_cis,
            np.minimum(reports["hard"].null_cis, reports["soft"].null_cis),
        )

    def test_sample_method_keeps_trailing_zeros(self):
        # d > n: the sample spectrum carries d - n + 1 exact zeros; those
        # rows simulate as constant zero rather than being floored.
        rng = np.random.default_rng(19)
        x = DataMatrix(rng.normal(size=(30, 10)))
        report = run_test(x, make_config(method="sample"))
        lam = report.spectrum_used.eigenvalues
        assert lam.size == 30
        assert np.all(lam[9:] == 0.0)
        assert np.all((report.null_cis >= 0.0) & (report.null_cis <= 1.0))

    def test_known_label_mode(self):
        from sigclust import cluster_index_for_labels

        rng = np.random.default_rng(15)
        x = DataMatrix(rng.normal(size=(4, 10)))
        labels = np.array([1, 2] * 5)
        report = run_test(x, make_config(method="sample", labels=labels))
        assert report.observed_mode == "known-labels"
        assert report.ci_observed == cluster_index_for_labels(x, labels).ci

    def test_true_method_requires_eigenvalues(self):
        rng = np.random.default_rng(16)
        x = DataMatrix(rng.normal(size=(4, 10)))
        with pytest.raises(InvalidConfigError):
            run_test(x, make_config(method="true"))
        with pytest.raises(InvalidSpectraError):
            run_test(
                x,
                make_config(method="true", true_eigenvalues=np.ones(3)),
            )

    def test_soft_fallback_to_flat_spectrum(self):
        # Rows nearly constant but far apart: the entry MAD is large while
        # the row-centered trace is tiny, so no soft offset can match it.
        rng = np.random.default_rng(17)
        base = np.arange(10.0)[:, None] * 30.0
        x = DataMatrix(base + 1e-3 * rng.normal(size=(10, 8)))
        report = run_test(x, make_config(method="soft"))
        assert any("flat spectrum" in w for w in report.warnings)
        lam = report.spectrum_used.eigenvalues
        assert np.allclose(lam, lam[0])  # flat
        assert report.spectrum_used.tau is None

    def test_config_validation(self):
        with pytest.raises(InvalidConfigError):
            TestConfig(n_sim=50)
        with pytest.raises(InvalidConfigError):
            TestConfig(method="bogus")
        with pytest.raises(InvalidConfigError):
            TestConfig(restarts_null=0)
        with pytest.raises(InvalidConfigError):
            TestConfig(workers=0)

    def test_missing_seed_drawn_and_echoed(self):
        config = TestConfig(n_sim=100)
        assert isinstance(config.master_seed, int)
        rng = np.random.default_rng(18)
        x = DataMatrix(rng.normal(size=(3, 12)))
        report = run_test(x, config)
        rerun = run_test(x, make_config(method=config.method, master_seed=report.seed))
        np.testing.assert_array_equal(report.null_cis, rerun.null_cis)


class TestTrueMethodCalibration:
    def test_null_pvalues_roughly_uniform_smoke(self):
        # Identity covariance, small scale; the full-accuracy version runs
        # in the acceptance suite.
        lam = np.ones(20)
        rejections = 0
        reps = 40
        for rep in range(reps):
            rng = np.random.default_rng(1000 + rep)
            x = DataMatrix(rng.standard_normal((20, 20)))
            report = run_test(
                x, make_config(method="true", true_eigenvalues=lam, master_seed=rep)
            )
            rejections += report.p_empirical < 0.05
        assert rejections / reps <= 0.2
