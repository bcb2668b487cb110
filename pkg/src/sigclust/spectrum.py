"""Null-spectrum estimation: MAD background noise and eigenvalue thresholding.

Both estimators start from the sample covariance eigenvalues padded to the
full dimension d. Hard thresholding floors every eigenvalue at the
background noise variance, leaving large eigenvalues untouched. Soft
thresholding additionally subtracts a constant offset tau from the
eigenvalues that stay above the floor, with tau chosen so that the
estimated spectrum keeps the sample trace, which is the unbiased estimate
of the total variation. A small random-matrix helper predicts where the
sample eigenvalues of a spiked covariance land in high dimensions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from .errors import (
    DegenerateNoiseError,
    InvalidConfigError,
    InvalidDataError,
    NoTraceSolutionError,
    SpikeBelowBulkError,
)
from .linalg import DataMatrix, EigenSpectrum

# MAD of the standard normal distribution, i.e. the 75% quantile of |N(0,1)|.
# Computed from the inverse normal CDF rather than hard-coded.
MAD_STD_NORMAL = float(norm.ppf(0.75))

# Trace-matching tolerance for the soft estimator, relative to the trace.
SOFT_TRACE_RTOL = 1e-10
_BISECT_MAX_ITER = 200
_BISECT_WIDTH_REL = 1e-14

_METHODS = ("sample", "hard", "soft", "true")


@dataclass(frozen=True)
class NoiseEstimate:
    """Background noise variance estimated from the MAD of all d*n entries."""

    sigma_n_sq: float
    mad_raw: float


@dataclass(frozen=True)
class NullSpectrum:
    """Length-d descending eigenvalue vector defining a Gaussian null.

    ``method`` is one of "sample", "hard", "soft", "true". Thresholded
    spectra ("hard", "soft") are strictly positive; "sample" and "true"
    spectra may carry exact zeros (rows with zero eigenvalue simulate as
    constant zero). ``sigma_n_sq`` is set for hard/soft, ``tau`` for soft,
    and ``rank_cap_l`` for hard.
    """

    method: str
    eigenvalues: np.ndarray
    sigma_n_sq: float | None = None
    tau: float | None = None
    rank_cap_l: int | None = None

    def __post_init__(self):
        if self.method not in _METHODS:
            raise InvalidConfigError(f"unknown spectrum method {self.method!r}")
        lam = np.asarray(self.eigenvalues, dtype=np.float64)
        if lam.ndim != 1 or lam.size == 0:
            raise InvalidDataError("eigenvalues must be a nonempty 1-d vector")
        if not np.all(np.isfinite(lam)):
            raise InvalidDataError("eigenvalues contain NaN or infinite entries")
        if np.any(np.diff(lam) > 0):
            raise InvalidDataError("eigenvalues must be sorted descending")
        if np.any(lam < 0) or lam.sum() <= 0:
            raise InvalidDataError("eigenvalues must be nonnegative with positive sum")
        if self.method in ("hard", "soft") and lam[-1] <= 0:
            raise InvalidDataError(f"{self.method} spectrum must be strictly positive")
        object.__setattr__(self, "eigenvalues", lam)

    @property
    def d(self) -> int:
        return self.eigenvalues.size


def estimate_noise(x: DataMatrix) -> NoiseEstimate:
    """MAD-based background noise variance over all d*n raw entries.

    The deviation center is the overall median of the raw (uncentered)
    entries; the raw MAD is rescaled by the standard-normal MAD so that
    ``sigma_n_sq`` is consistent for Gaussian noise. A zero MAD means a
    mostly constant matrix with no meaningful null and raises
    :class:`DegenerateNoiseError`.
    """
    entries = x.values.ravel()
    mad_raw = float(np.median(np.abs(entries - np.median(entries))))
    if mad_raw == 0.0:
        raise DegenerateNoiseError(
            "MAD of the data is zero; background noise level undefined"
        )
    sigma_n = mad_raw / MAD_STD_NORMAL
    return NoiseEstimate(sigma_n_sq=sigma_n * sigma_n, mad_raw=mad_raw)


def hard_threshold(spec: EigenSpectrum, noise: NoiseEstimate) -> NullSpectrum:
    """Floor every sample eigenvalue at the noise variance.

    Eigenvalues above the noise level are kept exactly as sampled. The
    recorded ``rank_cap_l`` is the number of sample eigenvalues strictly
    above the noise variance, the smallest rank cap that reproduces this
    estimator.
    """
    lam = spec.padded()
    s2 = noise.sigma_n_sq
    return NullSpectrum(
        method="hard",
        eigenvalues=np.maximum(lam, s2),
        sigma_n_sq=s2,
        rank_cap_l=int(np.count_nonzero(lam > s2)),
    )


def soft_threshold(spec: EigenSpectrum, noise: NoiseEstimate) -> NullSpectrum:
    """Shrink large eigenvalues by a trace-matching offset tau.

    Each estimated eigenvalue is ``max(lam_k - tau - s2, 0) + s2`` where s2
    is the noise variance and tau >= 0 solves

        sum_k max(lam_k - tau - s2, 0) + d * s2 = sum_k lam_k.

    The left side is nonincreasing in tau, so tau is found by bisection on
    [0, lam_1], run down to an interval width of ``1e-14 * lam_1`` (or 200
    iterations) and declared converged only if the trace residual is within
    ``SOFT_TRACE_RTOL`` of the trace. If the noise floor alone exceeds the
    trace (d * s2 > trace), no tau works and
    :class:`NoTraceSolutionError` is raised.
    """
    lam = spec.padded()
    s2 = noise.sigma_n_sq
    d = lam.size
    target = float(lam.sum())
    if d * s2 > target:
        raise NoTraceSolutionError(
            f"noise floor d*sigma^2 = {d * s2:.6g} exceeds the sample trace "
            f"{target:.6g}; no nonnegative offset matches the trace"
        )
    tol = SOFT_TRACE_RTOL * target

    def shrunk_sum(tau: float) -> float:
        return float(np.maximum(lam - tau - s2, 0.0).sum()) + d * s2

    if abs(shrunk_sum(0.0) - target) <= tol:
        # Already trace-matched: the estimator reduces to the sample
        # spectrum (floored at s2 where padding zeros would sneak in).
        return NullSpectrum(
            method="soft", eigenvalues=np.maximum(lam, s2), sigma_n_sq=s2, tau=0.0
        )

    lo, hi = 0.0, float(lam[0])
    for _ in range(_BISECT_MAX_ITER):
        mid = 0.5 * (lo + hi)
        if shrunk_sum(mid) > target:
            lo = mid
        else:
            hi = mid
        if hi - lo <= _BISECT_WIDTH_REL * lam[0]:
            break
    tau = 0.5 * (lo + hi)
    if abs(shrunk_sum(tau) - target) > tol:
        raise NoTraceSolutionError(
            "trace-matching bisection did not converge to tolerance"
        )
    eigenvalues = np.maximum(lam - tau - s2, 0.0) + s2
    return NullSpectrum(method="soft", eigenvalues=eigenvalues, sigma_n_sq=s2, tau=tau)


def flat_fallback_spectrum(spec: EigenSpectrum, noise: NoiseEstimate) -> NullSpectrum:
    """Trace-preserving flat spectrum used when no soft offset exists.

    All d eigenvalues are set to trace/d, which keeps the total variation
    unbiased, the quantity that drives the test statistic's denominator.
    """
    lam = np.full(spec.d, spec.trace / spec.d)
    return NullSpectrum(
        method="soft", eigenvalues=lam, sigma_n_sq=noise.sigma_n_sq, tau=None
    )


def rmt_predicted_spectrum(v: float, w: int, n: int, d: int) -> np.ndarray:
    """Large-dimension limits of sample eigenvalues under a spiked covariance.

    For a population spectrum with w spikes at height v over a unit noise
    floor and aspect ratio rho = d/n, returns the predicted sample
    eigenvalues at positions 1..w (the inflated spikes, ``v + rho*v/(v-1)``),
    w+1 (the upper bulk edge ``(1+sqrt(rho))^2``), and n (the lower bulk edge
    ``(1-sqrt(rho))^2``), as a length w+2 vector.

    Requires d > n and 1 <= w < n. If v does not exceed ``1 + sqrt(rho)``
    the spike does not separate from the bulk and
    :class:`SpikeBelowBulkError` is raised, carrying the bulk edges.
    """
    if d <= n:
        raise InvalidConfigError("prediction requires d > n")
    if not 1 <= w < n:
        raise InvalidConfigError("spike count w must satisfy 1 <= w < n")
    rho = d / n
    root = np.sqrt(rho)
    upper = (1.0 + root) ** 2
    lower = (1.0 - root) ** 2
    if v <= 1.0 + root:
        raise SpikeBelowBulkError(
            f"spike height {v:.6g} does not exceed 1 + sqrt(rho) = {1.0 + root:.6g}; "
            f"only the bulk edges {upper:.6g} and {lower:.6g} are defined",
            bulk_edge_upper=upper,
            bulk_edge_lower=lower,
        )
    spike = v + rho * v / (v - 1.0)
    return np.array([spike] * w + [upper, lower])
