"""Dense linear-algebra kernel: row centering and sample-covariance spectra.

Data matrices are oriented variables-by-observations: d rows, n columns.
The sample covariance uses the 1/n normalizer. Its nonzero eigenvalues are
computed from the n-by-n Gram matrix whenever d > n, which is the cheap
route in high-dimension low-sample-size regimes, and from the d-by-d
covariance otherwise. All operations are pure functions over immutable
inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidDataError

# Eigenvalues below EPS_EIG_REL times the largest one are round-off noise
# and are clamped to exactly zero.
EPS_EIG_REL = 1e-10


@dataclass(frozen=True)
class DataMatrix:
    """A dense d-by-n matrix: d variables in rows, n >= 2 observations in columns.

    Entries must all be finite; the constructor copies the input into a
    float64 array and rejects anything else.
    """

    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise InvalidDataError(f"expected a 2-d array, got ndim={values.ndim}")
        d, n = values.shape
        if d < 1:
            raise InvalidDataError("matrix needs at least one variable (row)")
        if n < 2:
            raise InvalidDataError(f"need at least 2 observations (columns), got {n}")
        if not np.all(np.isfinite(values)):
            raise InvalidDataError("matrix contains NaN or infinite entries")
        object.__setattr__(self, "values", values)

    @property
    def d(self) -> int:
        return self.values.shape[0]

    @property
    def n(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class EigenSpectrum:
    """Descending eigenvalues of a 1/n sample covariance.

    ``eigenvalues`` has length min(d, n); the remaining d - min(d, n)
    eigenvalues are exact zeros and are materialized by :meth:`padded`.
    ``trace`` is the sum of all d eigenvalues.
    """

    eigenvalues: np.ndarray
    trace: float
    d: int
    n: int

    def padded(self) -> np.ndarray:
        """Full length-d eigenvalue vector, trailing exact zeros included."""
        out = np.zeros(self.d)
        out[: self.eigenvalues.size] = self.eigenvalues
        return out


def center_rows(x: DataMatrix) -> DataMatrix:
    """Subtract each row's mean so every variable has mean zero.

    The column count is unchanged; each output row has mean zero up to
    round-off relative to the row's largest magnitude.
    """
    return DataMatrix(x.values - x.values.mean(axis=1, keepdims=True))


def sample_spectrum(x: DataMatrix) -> EigenSpectrum:
    """Eigenvalues of the 1/n sample covariance of the row-centered matrix.

    For d > n the spectrum comes from the n-by-n Gram matrix of the centered
    columns, whose nonzero eigenvalues coincide with the covariance's. Row
    centering puts the all-ones vector in the null space, so at most n - 1
    eigenvalues are nonzero; trailing eigenvalues are reported as exact
    zeros, as are round-off values below ``EPS_EIG_REL`` times the largest.
    """
    centered = center_rows(x).values
    d, n = centered.shape
    if d > n:
        gram = (centered.T @ centered) / n
        evals = np.linalg.eigvalsh(gram)
    else:
        cov = (centered @ centered.T) / n
        evals = np.linalg.eigvalsh(cov)
    evals = np.sort(evals)[::-1].copy()
    top = max(float(evals[0]), 0.0)
    evals[evals < EPS_EIG_REL * top] = 0.0
    if n - 1 < evals.size:
        evals[n - 1 :] = 0.0  # rank of the centered matrix is at most n - 1
    return EigenSpectrum(eigenvalues=evals, trace=float(evals.sum()), d=d, n=n)
