"""2-means clustering and the cluster-index test statistic.

The cluster index of a binary split is the within-cluster sum of squares
divided by the total sum of squares about the grand mean; small values
mean strong clustering. Lloyd-style 2-means with seeded restarts minimizes
the index approximately, and an exhaustive bipartition search provides the
exact optimum for small n. Two closed-form diagnostics relate the index to
a covariance eigenvalue spectrum: the population value of the optimal
split of a centered Gaussian, and the signed bias that a distorted
spectrum induces in that value.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._streams import as_generator
from .errors import (
    DegenerateDataError,
    InvalidConfigError,
    InvalidDataError,
    InvalidLabelsError,
    TooLargeError,
)
from .linalg import DataMatrix

MAX_LLOYD_ITER = 300
EXHAUSTIVE_MAX_N = 20
_EXHAUSTIVE_CHUNK = 1 << 16


@dataclass(frozen=True)
class ClusterSplit:
    """A binary partition of the observations with its sums of squares.

    ``labels`` holds 1 or 2 per observation; ``ci = wss / tss``.
    """

    labels: np.ndarray
    wss: float
    tss: float
    ci: float


def _tss(values: np.ndarray) -> float:
    centered = values - values.mean(axis=1, keepdims=True)
    return float((centered * centered).sum())


def _wss(values: np.ndarray, labels: np.ndarray) -> float:
    total = 0.0
    for k in (1, 2):
        cols = values[:, labels == k]
        delta = cols - cols.mean(axis=1, keepdims=True)
        total += float((delta * delta).sum())
    return total


def cluster_index_for_labels(x: DataMatrix, labels) -> ClusterSplit:
    """Cluster index of a user-supplied binary partition.

    The total sum of squares is taken about the grand mean, matching the
    k-means decomposition, and each cluster's contribution is taken about
    its own centroid. Raises :class:`InvalidLabelsError` unless both
    clusters are nonempty, and :class:`DegenerateDataError` when all
    observations coincide (zero total sum of squares).
    """
    labels = np.asarray(labels)
    if labels.shape != (x.n,):
        raise InvalidLabelsError(
            f"labels must have length n={x.n}, got shape {labels.shape}"
        )
    if not np.all((labels == 1) | (labels == 2)):
        raise InvalidLabelsError("labels must take values 1 or 2 only")
    labels = labels.astype(np.int64)
    if not (np.any(labels == 1) and np.any(labels == 2)):
        raise InvalidLabelsError("both clusters must be nonempty")
    tss = _tss(x.values)
    if tss <= 0.0:
        raise DegenerateDataError("total sum of squares is zero; no cluster structure")
    wss = _wss(x.values, labels)
    return ClusterSplit(labels=labels, wss=wss, tss=tss, ci=wss / tss)


def _assign(values, c1, c2, current):
    # Signed margin between squared distances: g > 0 means closer to c1.
    g = (c1 - c2) @ values - 0.5 * (c1 @ c1 - c2 @ c2)
    if current is None:
        return np.where(g >= 0.0, 1, 2)  # initial ties go to cluster 1
    return np.where(g > 0.0, 1, np.where(g < 0.0, 2, current))  # ties keep labels


def _centroids(values, labels, row_total):
    mask2 = (labels == 2).astype(np.float64)
    n2 = mask2.sum()
    s2 = values @ mask2
    c1 = (row_total - s2) / (values.shape[1] - n2)
    c2 = s2 / n2
    return c1, c2, n2


def _repair_empty(values, labels, row_total):
    # An emptied cluster is refilled with the point farthest from the
    # surviving centroid (which is then the grand mean).
    n = values.shape[1]
    for k in (1, 2):
        if not np.any(labels == k):
            centroid = row_total / n
            dist = ((values - centroid[:, None]) ** 2).sum(axis=0)
            labels = labels.copy()
            labels[int(np.argmax(dist))] = k
    return labels


def _lloyd(values, rng, row_total):
    """One seeded Lloyd run; returns labels with both clusters nonempty."""
    n = values.shape[1]
    i = int(rng.integers(n))
    j = int(rng.integers(n - 1))
    if j >= i:
        j += 1  # uniform distinct pair of initial observations
    labels = _assign(values, values[:, i], values[:, j], current=None)
    for _ in range(MAX_LLOYD_ITER):
        labels = _repair_empty(values, labels, row_total)
        c1, c2, _ = _centroids(values, labels, row_total)
        new = _assign(values, c1, c2, current=labels)
        if np.array_equal(new, labels):
            break
        labels = new
    return _repair_empty(values, labels, row_total)


def _best_split(values, restarts, rng):
    n = values.shape[1]
    row_total = values.sum(axis=1)
    total_sq = float((values * values).sum())
    best_labels = None
    best_wss = np.inf
    for _ in range(restarts):
        labels = _lloyd(values, rng, row_total)
        c1, c2, n2 = _centroids(values, labels, row_total)
        # wss via the centroid identity; clamp round-off below zero
        wss = max(total_sq - (n - n2) * float(c1 @ c1) - n2 * float(c2 @ c2), 0.0)
        if wss < best_wss:
            best_wss = wss
            best_labels = labels
    return best_labels, best_wss


def two_means_ci(x: DataMatrix, restarts: int = 20, seed=None) -> ClusterSplit:
    """Best 2-means split over seeded restarts, by minimal cluster index.

    Each restart initializes the centroids at a distinct pair of
    observations drawn from the seeded generator, then iterates Lloyd
    updates until the labels stabilize (at most ``MAX_LLOYD_ITER`` sweeps).
    A point equidistant from both centroids keeps its current label, and an
    emptied cluster is refilled with the point farthest from the surviving
    centroid. The returned index is an upper bound on the global optimum
    and is deterministic given the seed.
    """
    if restarts < 1:
        raise InvalidConfigError("restarts must be >= 1")
    tss = _tss(x.values)
    if tss <= 0.0:
        raise DegenerateDataError("total sum of squares is zero; no cluster structure")
    labels, _ = _best_split(x.values, restarts, as_generator(seed))
    wss = _wss(x.values, labels)  # recompute in the well-conditioned direct form
    return ClusterSplit(labels=labels, wss=wss, tss=tss, ci=wss / tss)


def two_means_index(values: np.ndarray, restarts: int, rng) -> float:
    """Cluster index of the best seeded 2-means split of a raw d-by-n array.

    Fast path for the simulation engine: skips DataMatrix validation.
    """
    tss = _tss(values)
    if tss <= 0.0:
        raise DegenerateDataError("total sum of squares is zero; no cluster structure")
    _, wss = _best_split(values, restarts, rng)
    return wss / tss


def two_means_exhaustive(x: DataMatrix) -> ClusterSplit:
    """Exact minimum-index bipartition by enumerating all 2^(n-1) - 1 splits.

    Observation 0 is pinned to cluster 1, so every nonempty bipartition is
    visited exactly once. Only feasible for n <= ``EXHAUSTIVE_MAX_N``.
    """
    n = x.n
    if n > EXHAUSTIVE_MAX_N:
        raise TooLargeError(
            f"exhaustive search needs n <= {EXHAUSTIVE_MAX_N}, got {n}"
        )
    tss = _tss(x.values)
    if tss <= 0.0:
        raise DegenerateDataError("total sum of squares is zero; no cluster structure")
    # Work on grand-mean-centered columns; wss is translation invariant and
    # the sum formula below is better conditioned this way.
    xc = x.values - x.values.mean(axis=1, keepdims=True)
    total_sq = float((xc * xc).sum())
    s_all = xc.sum(axis=1)
    rest = xc[:, 1:].T  # (n-1, d)
    m = n - 1
    count = (1 << m) - 1
    bit_id = np.arange(m, dtype=np.uint32)

    best_wss = np.inf
    best_mask = 0
    for start in range(1, count + 1, _EXHAUSTIVE_CHUNK):
        masks = np.arange(start, min(start + _EXHAUSTIVE_CHUNK, count + 1), dtype=np.uint32)
        bits = ((masks[:, None] >> bit_id) & 1).astype(np.float64)  # 1 -> cluster 2
        n2 = bits.sum(axis=1)
        n1 = n - n2
        s2 = bits @ rest
        s1 = s_all[None, :] - s2
        wss = total_sq - (s1 * s1).sum(axis=1) / n1 - (s2 * s2).sum(axis=1) / n2
        k = int(np.argmin(wss))
        if wss[k] < best_wss:
            best_wss = float(wss[k])
            best_mask = int(masks[k])

    labels = np.ones(n, dtype=np.int64)
    labels[1:][((best_mask >> bit_id) & 1) == 1] = 2
    return cluster_index_for_labels(x, labels)


def theoretical_ci(eigenvalues) -> float:
    """Population cluster index of the optimally split centered Gaussian.

    For a Gaussian with covariance eigenvalues ``lam`` (all positive,
    descending), the best split is along the top eigendirection and the
    index equals ``1 - (2/pi) * lam_1 / sum(lam)``. The value depends only
    on the ratio of the top eigenvalue to the total variation, so it is
    scale invariant.
    """
    lam = np.asarray(eigenvalues, dtype=np.float64)
    if lam.ndim != 1 or lam.size == 0:
        raise InvalidDataError("eigenvalues must be a nonempty 1-d vector")
    if not np.all(np.isfinite(lam)) or np.any(lam <= 0):
        raise InvalidDataError("eigenvalues must be positive and finite")
    return float(1.0 - (2.0 / np.pi) * (lam.max() / lam.sum()))


def hard_bias_diagnostic(lam, delta1: float, delta_total: float) -> float:
    """Signed population-index bias induced by a distorted spectrum.

    Given the true eigenvalues ``lam``, a bias ``delta1`` on the top
    eigenvalue and ``delta_total`` on the total variation, returns

        (sum(lam) * delta1 - lam_1 * delta_total)
        / (sum(lam) * (sum(lam) + delta_total)).

    Negative values flag an anti-conservative regime (the distorted null
    looks more clustered than the truth). Diagnostic only; not used in the
    decision path.
    """
    lam = np.asarray(lam, dtype=np.float64)
    if lam.ndim != 1 or lam.size == 0 or np.any(lam <= 0):
        raise InvalidDataError("eigenvalues must be a nonempty positive vector")
    total = float(lam.sum())
    if total + delta_total <= 0:
        raise InvalidConfigError("total variation plus its bias must be positive")
    top = float(lam.max())
    return (total * delta1 - top * delta_total) / (total * (total + delta_total))
