"""Command-line front end.

Subcommands:
  test      run the significance test on a matrix file
  simulate  run a scenario grid file and write summary tables
  spectrum  print the sample, hard, and soft eigenvalues for a matrix
  tci       print the population cluster index for a spectrum file

Exit codes: 0 success, 2 parse error, 3 invalid data, 4 degenerate
data/noise, 5 I/O error, 6 bad configuration, 7 other library error.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

from . import __version__
from .cluster import theoretical_ci
from .engine import METHODS, TestConfig, run_test
from .errors import (
    DegenerateDataError,
    DegenerateNoiseError,
    InvalidConfigError,
    InvalidDataError,
    NoTraceSolutionError,
    ParseError,
    SigClustError,
)
from .harness import (
    builtin_calibration_grid_path,
    load_scenario_file,
    run_grid,
    summary_rows,
    write_summary_csv,
    write_summary_json,
)
from .io import (
    RunManifest,
    emit_report,
    filter_variables,
    load_eigenvalue_file,
    load_labels,
    load_matrix,
)
from .linalg import sample_spectrum
from .spectrum import (
    estimate_noise,
    flat_fallback_spectrum,
    hard_threshold,
    soft_threshold,
)

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_INVALID_DATA = 3
EXIT_DEGENERATE = 4
EXIT_IO = 5
EXIT_CONFIG = 6
EXIT_OTHER = 7


def _add_matrix_args(parser):
    parser.add_argument("matrix", help="CSV matrix file")
    parser.add_argument(
        "--observations-in-rows",
        action="store_true",
        help="input rows are observations (the matrix is transposed on load)",
    )
    parser.add_argument(
        "--header",
        choices=("auto", "yes", "no"),
        default="auto",
        help="whether the first row is a header (default: auto-detect)",
    )
    parser.add_argument(
        "--row-names",
        choices=("auto", "yes", "no"),
        default="auto",
        help="whether the first column holds row names (default: auto-detect)",
    )
    parser.add_argument(
        "--filter-top-k",
        type=int,
        default=None,
        metavar="K",
        help="keep only the K rows with the largest sd/mean ratio",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sigclust",
        description="Monte Carlo significance testing for 2-means clusters",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_test = sub.add_parser("test", help="run the significance test on a matrix")
    _add_matrix_args(p_test)
    p_test.add_argument("--method", choices=METHODS, default="combined")
    p_test.add_argument("--nsim", type=int, default=1000, help="null replications")
    p_test.add_argument("--seed", type=int, default=None, help="master seed")
    p_test.add_argument("--labels", default=None, metavar="FILE",
                        help="known-label file: one label (1 or 2) per line")
    p_test.add_argument("--true-eigenvalues", default=None, metavar="FILE",
                        help="spectrum file for --method true")
    p_test.add_argument("--restarts-null", type=int, default=20)
    p_test.add_argument("--restarts-observed", type=int, default=100)
    p_test.add_argument("--workers", type=int, default=1)
    p_test.add_argument("--out", default=None, metavar="DIR",
                        help="write report.json and CSV twins into DIR")
    p_test.set_defaults(func=_cmd_test)

    p_sim = sub.add_parser("simulate", help="run a scenario grid file")
    p_sim.add_argument("--scenario", default=None, metavar="FILE",
                       help="scenario CSV (default: packaged 31-cell grid)")
    p_sim.add_argument("--methods", default="true,sample,hard,soft,combined",
                       help="comma-separated methods to run")
    p_sim.add_argument("--full-scale", action="store_true",
                       help="run the file's reps/n_sim instead of desk-scale caps")
    p_sim.add_argument("--seed", type=int, default=None)
    p_sim.add_argument("--workers", type=int, default=1)
    p_sim.add_argument("--out", default=None, metavar="DIR",
                       help="write summary.csv and summary.json into DIR")
    p_sim.set_defaults(func=_cmd_simulate)

    p_spec = sub.add_parser("spectrum", help="print estimated null eigenvalues")
    _add_matrix_args(p_spec)
    p_spec.add_argument("--out", default=None, metavar="DIR",
                        help="write spectrum.csv into DIR")
    p_spec.set_defaults(func=_cmd_spectrum)

    p_tci = sub.add_parser("tci", help="population cluster index of a spectrum")
    p_tci.add_argument("spectrum", help="file with one eigenvalue per line")
    p_tci.set_defaults(func=_cmd_tci)

    return parser


def _load_input(args):
    x = load_matrix(
        args.matrix,
        observations_in_rows=args.observations_in_rows,
        header=args.header,
        row_names=args.row_names,
    )
    if args.filter_top_k is not None:
        x = filter_variables(x, args.filter_top_k)
    return x


def _cmd_test(args) -> int:
    x = _load_input(args)
    labels = load_labels(args.labels, x.n) if args.labels else None
    true_eigs = (
        load_eigenvalue_file(args.true_eigenvalues) if args.true_eigenvalues else None
    )
    if args.method == "true" and true_eigs is None:
        raise InvalidConfigError("--method true requires --true-eigenvalues FILE")
    config = TestConfig(
        method=args.method,
        n_sim=args.nsim,
        master_seed=args.seed,
        restarts_null=args.restarts_null,
        restarts_observed=args.restarts_observed,
        labels=labels,
        true_eigenvalues=true_eigs,
        workers=args.workers,
    )
    report = run_test(x, config)

    print(f"method:               {report.method}")
    print(f"matrix:               d={x.d} n={x.n} ({args.matrix})")
    print(f"observed mode:        {report.observed_mode}")
    print(f"cluster index:        {report.ci_observed:.9g}")
    print(f"p-value (empirical):  {report.p_empirical:.6g}")
    print(f"p-value (gaussian):   {report.p_gaussian:.6g}")
    print(f"null mean / sd:       {report.null_mean:.9g} / {report.null_sd:.9g}")
    print(f"seed:                 {report.seed}")
    for w in report.warnings:
        print(f"warning: {w}", file=sys.stderr)
    if args.out:
        manifest = RunManifest(
            input_path=args.matrix,
            observations_in_rows=args.observations_in_rows,
            method=args.method,
            n_sim=args.nsim,
            seed=report.seed,
            labels_path=args.labels,
            filter_top_k=args.filter_top_k,
            out_dir=args.out,
        )
        for path in emit_report(report, manifest):
            print(f"wrote: {path}")
    return EXIT_OK


def _cmd_simulate(args) -> int:
    scenario = args.scenario if args.scenario else builtin_calibration_grid_path()
    methods = tuple(m.strip() for m in args.methods.split(",") if m.strip())
    specs = load_scenario_file(
        scenario, methods=methods, master_seed=args.seed, full_scale=args.full_scale
    )
    print(
        f"running {len(specs)} scenario(s) x {len(methods)} method(s), "
        f"seed {specs[0].master_seed}",
        file=sys.stderr,
    )
    grid = run_grid(specs, workers=args.workers)
    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        write_summary_csv(grid, out_dir / "summary.csv")
        write_summary_json(grid, out_dir / "summary.json")
        print(f"wrote: {out_dir / 'summary.csv'}")
        print(f"wrote: {out_dir / 'summary.json'}")
    else:
        head, rows = summary_rows(grid)
        writer = csv.writer(sys.stdout)
        writer.writerow(head)
        writer.writerows(rows)
    return EXIT_OK


def _cmd_spectrum(args) -> int:
    x = _load_input(args)
    spec = sample_spectrum(x)
    noise = estimate_noise(x)
    hard = hard_threshold(spec, noise)
    note = ""
    try:
        soft = soft_threshold(spec, noise)
    except NoTraceSolutionError as err:
        soft = flat_fallback_spectrum(spec, noise)
        note = f"warning: soft estimator fell back to a flat spectrum: {err}"
    print(f"d={x.d} n={x.n}")
    print(f"sigma_n_sq: {noise.sigma_n_sq:.9g}")
    print(f"tau:        {'n/a' if soft.tau is None else format(soft.tau, '.9g')}")
    print(f"rank_cap_l: {hard.rank_cap_l}")
    if note:
        print(note, file=sys.stderr)
    lam = spec.padded()
    lines = ["index,sample,hard,soft"]
    for k in range(x.d):
        lines.append(
            f"{k + 1},{lam[k]:.9g},{hard.eigenvalues[k]:.9g},{soft.eigenvalues[k]:.9g}"
        )
    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        path = out_dir / "spectrum.csv"
        path.write_text("\n".join(lines) + "\n")
        print(f"wrote: {path}")
    else:
        print("\n".join(lines))
    return EXIT_OK


def _cmd_tci(args) -> int:
    eigenvalues = load_eigenvalue_file(args.spectrum)
    print(f"{theoretical_ci(eigenvalues):.9g}")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ParseError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_PARSE
    except InvalidDataError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INVALID_DATA
    except (DegenerateDataError, DegenerateNoiseError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_DEGENERATE
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_IO
    except InvalidConfigError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except SigClustError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_OTHER


def main_entry() -> None:  # console-script entry point
    sys.exit(main())
