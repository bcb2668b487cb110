import numpy as np
import pytest

from sigclust import (
    DataMatrix,
    DegenerateDataError,
    InvalidDataError,
    InvalidLabelsError,
    TooLargeError,
    cluster_index_for_labels,
    hard_bias_diagnostic,
    theoretical_ci,
    two_means_ci,
    two_means_exhaustive,
)


def one_d(points):
    return DataMatrix(np.asarray(points, dtype=np.float64)[None, :])


class TestClusterIndexForLabels:
    def test_perfectly_separated_pairs(self):
        split = cluster_index_for_labels(one_d([-1, -1, 1, 1]), [1, 1, 2, 2])
        assert split.wss == 0.0
        assert split.tss == 4.0
        assert split.ci == 0.0

    def test_three_points(self):
        split = cluster_index_for_labels(one_d([0, 1, 2]), [1, 2, 2])
        assert split.wss == pytest.approx(0.5, abs=1e-14)
        assert split.tss == pytest.approx(2.0, abs=1e-14)
        assert split.ci == pytest.approx(0.25, abs=1e-14)

    def test_degenerate_data(self):
        x = DataMatrix(np.tile(np.arange(3.0)[:, None], (1, 4)))
        with pytest.raises(DegenerateDataError):
            cluster_index_for_labels(x, [1, 1, 2, 2])

    def test_bad_labels(self):
        x = one_d([0, 1, 2, 3])
        with pytest.raises(InvalidLabelsError):
            cluster_index_for_labels(x, [1, 1, 1, 1])  # cluster 2 empty
        with pytest.raises(InvalidLabelsError):
            cluster_index_for_labels(x, [1, 2, 3, 1])  # bad value
        with pytest.raises(InvalidLabelsError):
            cluster_index_for_labels(x, [1, 2])  # wrong length

    def test_location_invariance(self):
        rng = np.random.default_rng(0)
        values = rng.normal(size=(6, 15))
        labels = rng.integers(1, 3, size=15)
        labels[:2] = [1, 2]
        base = cluster_index_for_labels(DataMatrix(values), labels).ci
        shift = rng.normal(size=(6, 1)) * 50.0
        moved = cluster_index_for_labels(DataMatrix(values + shift), labels).ci
        assert moved == pytest.approx(base, abs=1e-10)

    def test_rotation_invariance(self):
        rng = np.random.default_rng(1)
        values = rng.normal(size=(8, 12))
        labels = rng.integers(1, 3, size=12)
        labels[:2] = [1, 2]
        q, _ = np.linalg.qr(rng.normal(size=(8, 8)))
        base = cluster_index_for_labels(DataMatrix(values), labels).ci
        rotated = cluster_index_for_labels(DataMatrix(q @ values), labels).ci
        assert rotated == pytest.approx(base, abs=1e-10)

    def test_ci_in_unit_interval(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            values = rng.normal(size=(4, 10))
            labels = rng.integers(1, 3, size=10)
            labels[:2] = [1, 2]
            split = cluster_index_for_labels(DataMatrix(values), labels)
            assert 0.0 <= split.ci <= 1.0
            assert split.wss <= split.tss + 1e-12


class TestTwoMeans:
    def test_separated_pairs(self):
        assert two_means_ci(one_d([-1, -1, 1, 1]), restarts=3, seed=0).ci == 0.0

    def test_three_points_matches_oracle(self):
        split = two_means_ci(one_d([0, 1, 2]), restarts=3, seed=7)
        assert split.ci == pytest.approx(0.25, abs=1e-14)

    def test_separated_blobs(self):
        rng = np.random.default_rng(3)
        blob1 = rng.normal(size=(2, 10))
        blob2 = rng.normal(size=(2, 10)) + 100.0
        x = DataMatrix(np.hstack([blob1, blob2]))
        split = two_means_ci(x, restarts=10, seed=1)
        assert split.ci < 0.01
        oracle = two_means_exhaustive(x)
        assert split.ci == pytest.approx(oracle.ci, abs=1e-12)

    def test_deterministic_given_seed(self):
        rng = np.random.default_rng(4)
        x = DataMatrix(rng.normal(size=(5, 30)))
        a = two_means_ci(x, restarts=10, seed=99)
        b = two_means_ci(x, restarts=10, seed=99)
        assert a.ci == b.ci
        np.testing.assert_array_equal(a.labels, b.labels)

    def test_degenerate_data(self):
        with pytest.raises(DegenerateDataError):
            two_means_ci(DataMatrix(np.ones((2, 5))), restarts=2, seed=0)

    def test_both_clusters_nonempty(self):
        # Duplicated columns make ties common; the split must stay binary.
        x = DataMatrix(np.array([[1.0, 1.0, 1.0, 5.0]]))
        split = two_means_ci(x, restarts=5, seed=2)
        assert set(split.labels.tolist()) == {1, 2}


class TestExhaustive:
    def test_three_points(self):
        split = two_means_exhaustive(one_d([0, 1, 2]))
        assert split.ci == pytest.approx(0.25, abs=1e-14)
        assert sorted(np.bincount(split.labels)[1:].tolist()) == [1, 2]

    def test_separated_pairs(self):
        assert two_means_exhaustive(one_d([-1, -1, 1, 1])).ci == 0.0

    def test_too_large(self):
        rng = np.random.default_rng(5)
        with pytest.raises(TooLargeError):
            two_means_exhaustive(DataMatrix(rng.normal(size=(2, 21))))

    def test_oracle_dominance_small_sample(self):
        rng = np.random.default_rng(6)
        hits = 0
        for trial in range(10):
            d = int(rng.integers(1, 6))
            n = int(rng.integers(4, 13))
            x = DataMatrix(rng.normal(size=(d, n)))
            restarted = two_means_ci(x, restarts=100, seed=trial).ci
            exact = two_means_exhaustive(x).ci
            assert restarted >= exact - 1e-12
            hits += abs(restarted - exact) <= 1e-10
        assert hits >= 9

    def test_rotation_invariance_of_optimum(self):
        rng = np.random.default_rng(7)
        values = rng.normal(size=(3, 9))
        q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
        base = two_means_exhaustive(DataMatrix(values)).ci
        rotated = two_means_exhaustive(DataMatrix(q @ values)).ci
        assert rotated == pytest.approx(base, abs=1e-10)


class TestTheoreticalCI:
    def test_single_eigenvalue(self):
        assert theoretical_ci([7.0]) == pytest.approx(1.0 - 2.0 / np.pi, rel=1e-15)
        assert theoretical_ci([7.0]) == pytest.approx(0.36338, abs=5e-6)

    def test_spiked_spectrum(self):
        lam = np.r_[100.0, np.ones(999)]
        expected = 1.0 - (2.0 / np.pi) * (100.0 / 1099.0)
        assert theoretical_ci(lam) == pytest.approx(expected, rel=1e-15)
        assert theoretical_ci(lam) == pytest.approx(0.94209, abs=5e-5)

    def test_flat_spectrum(self):
        assert theoretical_ci(np.ones(1000)) == pytest.approx(
            1.0 - 2.0 / (1000.0 * np.pi), rel=1e-12
        )

    def test_scale_invariance(self):
        rng = np.random.default_rng(8)
        lam = np.sort(rng.uniform(0.1, 50.0, size=40))[::-1]
        assert theoretical_ci(4.0 * lam) == theoretical_ci(lam)

    def test_invalid_inputs(self):
        with pytest.raises(InvalidDataError):
            theoretical_ci([])
        with pytest.raises(InvalidDataError):
            theoretical_ci([1.0, -2.0])

    def test_monte_carlo_consistency_smoke(self):
        # Split a diagonal Gaussian at the sign of the first coordinate and
        # compare the empirical index against the closed form (full-accuracy
        # version runs in the acceptance suite).
        rng = np.random.default_rng(9)
        lam = np.r_[100.0, np.ones(9)]
        draws = 100_000
        x = np.sqrt(lam)[:, None] * rng.standard_normal((10, draws))
        labels = np.where(x[0] > 0, 1, 2)
        split = cluster_index_for_labels(DataMatrix(x), labels)
        assert split.ci == pytest.approx(theoretical_ci(lam), abs=0.01)


class TestHardBiasDiagnostic:
    LAM_SMALL = np.r_[100.0, np.ones(999)]
    LAM_BIG = np.r_[1000.0, np.ones(999)]

    def test_unbiased_case(self):
        assert hard_bias_diagnostic(self.LAM_SMALL, 0.0, 0.0) == 0.0

    def test_top_bias_only(self):
        out = hard_bias_diagnostic(self.LAM_SMALL, 10.0, 0.0)
        assert out == pytest.approx(10.0 / 1099.0, rel=1e-12)
        assert out > 0

    def test_anti_conservative_regime(self):
        out = hard_bias_diagnostic(self.LAM_BIG, 10.0, 900.0)
        expected = (1999.0 * 10.0 - 1000.0 * 900.0) / (1999.0 * 2899.0)
        assert out == pytest.approx(expected, rel=1e-12)
        assert out < 0
