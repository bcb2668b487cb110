"""Matrix and label ingestion, variable filtering, and report emission.

Matrices arrive as rectangular numeric CSV files, optionally with a single
header row and a leading row-name column; both are auto-detected by a
first-cell-non-numeric heuristic and can be pinned explicitly. Reports are
written as JSON with a fixed key order so that two runs with the same seed
produce byte-identical files apart from the timing field, plus CSV twins
of the null indices for spreadsheet use.
"""

from __future__ import annotations

import csv
import json
import warnings as _pywarnings
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .engine import TestReport
from .errors import InvalidConfigError, InvalidLabelsError, ParseError
from .linalg import DataMatrix
from .spectrum import NullSpectrum

_TRISTATE = ("auto", "yes", "no")


@dataclass(frozen=True)
class RunManifest:
    """Echo of one CLI test invocation, embedded in the report JSON.

    Only statistically relevant settings belong here; execution knobs such
    as the worker count are excluded so reports stay byte-identical across
    worker configurations.
    """

    input_path: str
    observations_in_rows: bool = False
    method: str = "combined"
    n_sim: int = 1000
    seed: int | None = None
    labels_path: str | None = None
    filter_top_k: int | None = None
    out_dir: str | None = None


def _read_rows(path) -> list[list[str]]:
    with open(path, newline="") as fh:
        raw = [row for row in csv.reader(fh)]
    rows = [[cell.strip() for cell in row] for row in raw]
    while rows and rows[-1] in ([], [""]):
        rows.pop()  # tolerate trailing blank lines
    if not rows:
        raise ParseError(f"{path}: file contains no data", line=1)
    width = len(rows[0])
    for i, row in enumerate(rows, start=1):
        if len(row) != width:
            raise ParseError(
                f"{path}: row {i} has {len(row)} cells, expected {width}", line=i
            )
    return rows


def _try_parse(rows, skip_header, skip_names):
    """Parse the stripped grid to floats, or return the first bad cell."""
    r0 = 1 if skip_header else 0
    c0 = 1 if skip_names else 0
    if len(rows) <= r0 or len(rows[0]) <= c0:
        return None, (r0 + 1, c0 + 1)
    out = np.empty((len(rows) - r0, len(rows[0]) - c0))
    for i, row in enumerate(rows[r0:], start=r0):
        for j, cell in enumerate(row[c0:], start=c0):
            try:
                out[i - r0, j - c0] = float(cell)
            except ValueError:
                return None, (i + 1, j + 1)
    return out, None


def load_matrix(
    path,
    observations_in_rows: bool = False,
    header: str = "auto",
    row_names: str = "auto",
) -> DataMatrix:
    """Read a rectangular numeric CSV as a variables-by-observations matrix.

    With ``header`` or ``row_names`` left on "auto", the smallest amount of
    stripping that makes the remaining grid fully numeric wins; explicit
    "yes"/"no" pins the choice and a warning is emitted if the heuristic
    disagrees. Ragged rows and non-numeric cells raise :class:`ParseError`
    with 1-based file coordinates; NaN or infinite values parse but raise
    :class:`InvalidDataError`.
    """
    if header not in _TRISTATE or row_names not in _TRISTATE:
        raise InvalidConfigError('header and row_names must be "auto", "yes", or "no"')
    rows = _read_rows(path)

    header_options = {"auto": (False, True), "yes": (True,), "no": (False,)}[header]
    name_options = {"auto": (False, True), "yes": (True,), "no": (False,)}[row_names]
    combos = [(h, r) for h in header_options for r in name_options]
    combos.sort(key=lambda hr: hr[0] + hr[1])  # prefer minimal stripping

    failure = None
    for h, r in combos:
        values, bad = _try_parse(rows, h, r)
        if values is not None:
            if header == "auto" and h:
                _pywarnings.warn(f"{path}: treating the first row as a header")
            if row_names == "auto" and r:
                _pywarnings.warn(f"{path}: treating the first column as row names")
            if observations_in_rows:
                values = values.T
            return DataMatrix(values)
        failure = bad
    line, column = failure
    raise ParseError(
        f"{path}: non-numeric cell at row {line}, column {column}",
        line=line,
        column=column,
    )


def load_labels(path, n: int) -> np.ndarray:
    """Read a cluster-label file: one label (1 or 2) per line, n lines."""
    labels = []
    with open(path) as fh:
        for i, raw in enumerate(fh, start=1):
            text = raw.strip()
            if not text:
                continue
            if text not in ("1", "2"):
                raise ParseError(
                    f"{path}: line {i}: labels must be 1 or 2, got {text!r}", line=i
                )
            labels.append(int(text))
    if len(labels) != n:
        raise InvalidLabelsError(
            f"{path}: found {len(labels)} labels, expected n={n}"
        )
    return np.asarray(labels, dtype=np.int64)


def load_eigenvalue_file(path) -> np.ndarray:
    """Read a spectrum file: one eigenvalue per line, '#' comments allowed."""
    values = []
    with open(path) as fh:
        for i, raw in enumerate(fh, start=1):
            text = raw.strip()
            if not text or text.startswith("#"):
                continue
            try:
                values.append(float(text))
            except ValueError:
                raise ParseError(
                    f"{path}: line {i}: expected a number, got {text!r}", line=i
                ) from None
    if not values:
        raise ParseError(f"{path}: no eigenvalues found", line=1)
    return np.asarray(values, dtype=np.float64)


def filter_variables(x: DataMatrix, top_k: int) -> DataMatrix:
    """Keep the ``top_k`` rows with the largest sd/mean dispersion ratio.

    Rows with positive mean are ranked by sd/mean descending; rows with
    nonpositive mean rank below all of them, ordered by sd alone. The kept
    rows stay in their original order.
    """
    if not 1 <= top_k <= x.d:
        raise InvalidConfigError(f"filter_top_k must be in [1, d={x.d}], got {top_k}")
    if top_k == x.d:
        return x
    means = x.values.mean(axis=1)
    sds = x.values.std(axis=1, ddof=1)
    positive = np.flatnonzero(means > 0)
    rest = np.flatnonzero(means <= 0)
    ranked = np.concatenate(
        [
            positive[np.argsort(-(sds[positive] / means[positive]), kind="stable")],
            rest[np.argsort(-sds[rest], kind="stable")],
        ]
    )
    keep = np.sort(ranked[:top_k])
    return DataMatrix(x.values[keep])


def _spectrum_dict(spectrum: NullSpectrum) -> dict:
    return {
        "method": spectrum.method,
        "sigma_n_sq": spectrum.sigma_n_sq,
        "tau": spectrum.tau,
        "rank_cap_l": spectrum.rank_cap_l,
        "eigenvalues": [float(v) for v in spectrum.eigenvalues],
    }


def report_to_dict(report: TestReport, manifest: RunManifest | None = None) -> dict:
    """Flatten a report (and optional manifest echo) with fixed key order.

    The timing field comes last so that byte comparisons of everything
    above it are straightforward.
    """
    if isinstance(report.spectrum_used, tuple):
        spectrum = {
            "hard": _spectrum_dict(report.spectrum_used[0]),
            "soft": _spectrum_dict(report.spectrum_used[1]),
        }
        d = report.spectrum_used[0].d
    else:
        spectrum = _spectrum_dict(report.spectrum_used)
        d = report.spectrum_used.d
    return {
        "version": __version__,
        "config": asdict(manifest) if manifest is not None else None,
        "method": report.method,
        "observed_mode": report.observed_mode,
        "d": d,
        "n_sim": report.n_sim,
        "seed": report.seed,
        "restarts_null": report.restarts_null,
        "restarts_observed": report.restarts_observed,
        "ci_observed": report.ci_observed,
        "p_empirical": report.p_empirical,
        "p_gaussian": report.p_gaussian,
        "null_mean": report.null_mean,
        "null_sd": report.null_sd,
        "warnings": list(report.warnings),
        "spectrum": spectrum,
        "null_cis": [float(v) for v in report.null_cis],
        "timing_seconds": report.timing_seconds,
    }


def emit_report(report: TestReport, manifest: RunManifest) -> list[Path]:
    """Write the JSON report plus CSV twins into the manifest's out_dir.

    Produces report.json, null_cis.csv (one row per replication), and
    null_ci_ecdf.csv (sorted indices with empirical quantiles i/(n_sim+1)).
    Returns the written paths.
    """
    out_dir = Path(manifest.out_dir or ".")
    out_dir.mkdir(parents=True, exist_ok=True)

    report_path = out_dir / "report.json"
    with open(report_path, "w") as fh:
        json.dump(report_to_dict(report, manifest), fh, indent=2)
        fh.write("\n")

    cis_path = out_dir / "null_cis.csv"
    with open(cis_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["rep", "ci"])
        for r, ci in enumerate(report.null_cis):
            writer.writerow([r, repr(float(ci))])

    ecdf_path = out_dir / "null_ci_ecdf.csv"
    sorted_cis = np.sort(report.null_cis)
    with open(ecdf_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["rank", "ci", "quantile"])
        for r, ci in enumerate(sorted_cis, start=1):
            writer.writerow([r, repr(float(ci)), repr(r / (report.n_sim + 1))])

    return [report_path, cis_path, ecdf_path]
