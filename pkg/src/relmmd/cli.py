"""Command-line interface.

Exit status of ``relmmd test``: 0 favor-z, 1 favor-y, 2 inconclusive.
Errors exit with a status above 2 (see ``EXIT_*``).  Experiment commands exit 0
on success.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import __version__, experiments as ex
from .fileio import MatrixFileError, format_document, read_matrix, result_document, write_report
from .kernels import GAUSSIAN_RBF, LINEAR
from .reltest import Decision, relative_similarity_test

EXIT_STATUS = {Decision.FAVOR_Z: 0, Decision.FAVOR_Y: 1, Decision.INCONCLUSIVE: 2}
EXIT_USAGE = 3
EXIT_UNREADABLE = 4
EXIT_MALFORMED = 5
EXIT_DIMENSION = 6
EXIT_TOO_SMALL = 7
EXIT_UNWRITABLE = 8
EXIT_FAILURE = 9

KERNEL_HELP = (
    "kernel family: rbf is exp(-|u-v|^2 / (2 bw^2)) with bw the bandwidth; "
    "linear is the dot product (default: rbf)"
)
BANDWIDTH_HELP = (
    "'median' (default) averages the median X-Y and X-Z cross-pair distances; "
    "or a positive number in data units"
)


class CliError(Exception):
    def __init__(self, message, status):
        super().__init__(message)
        self.status = status


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise CliError(f"{self.prog}: error: {message}", EXIT_USAGE)


def _positive_float(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not (np.isfinite(v) and v > 0):
        raise argparse.ArgumentTypeError(f"must be positive and finite: {text!r}")
    return v


def _bandwidth(text):
    return "median" if text == "median" else _positive_float(text)


def _alpha(text):
    v = _positive_float(text)
    if v >= 1:
        raise argparse.ArgumentTypeError(f"alpha must lie in (0, 1): {text!r}")
    return v


def _vector(text):
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers: {text!r}") from None


def _kernel_name(name):
    return LINEAR if name == "linear" else GAUSSIAN_RBF


def _add_experiment_flags(p, m=500, repetitions=100):
    p.add_argument("--mu-y", type=_vector, default=(-5.0, -5.0), help="mean of Y (default -5,-5)")
    p.add_argument("--mu-z", type=_vector, default=(5.0, 5.0), help="mean of Z (default 5,5)")
    p.add_argument("--m", type=int, default=m, help=f"size of X (default {m})")
    p.add_argument("--n", type=int, help="size of Y (default: m)")
    p.add_argument("--r", type=int, help="size of Z (default: m)")
    p.add_argument("--repetitions", type=int, default=repetitions, help=f"repetitions per gamma (default {repetitions})")
    p.add_argument("--seed", type=int, required=True, help="root seed; same seed gives identical reports")
    p.add_argument("--kernel", choices=("rbf", "linear"), default="rbf", help=KERNEL_HELP)
    p.add_argument("--bandwidth", type=_bandwidth, default="median", help=BANDWIDTH_HELP)
    p.add_argument("--alpha", type=_alpha, default=0.05, help="significance level in (0, 1) (default 0.05)")
    p.add_argument("--out", required=True, help="output CSV path")


def _add_grid_flags(p):
    p.add_argument("--gamma-min", type=float, default=0.1, help="first grid point (default 0.1)")
    p.add_argument("--gamma-max", type=float, default=0.9, help="last grid point (default 0.9)")
    p.add_argument("--gamma-count", type=int, default=41, help="number of grid points (default 41)")
    p.add_argument("--gammas", type=_vector, help="explicit comma-separated grid; overrides min/max/count")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="relmmd", description="Relative similarity test based on the MMD.")
    parser.add_argument("--version", action="version", version=f"relmmd {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    t = sub.add_parser("test", help="test whether Z is closer to the reference than Y")
    t.add_argument("--ref", required=True, help="CSV of reference samples X")
    t.add_argument("--y", required=True, help="CSV of candidate samples Y")
    t.add_argument("--z", required=True, help="CSV of candidate samples Z")
    t.add_argument("--kernel", choices=("rbf", "linear"), default="rbf", help=KERNEL_HELP)
    t.add_argument("--bandwidth", type=_bandwidth, default="median", help=BANDWIDTH_HELP)
    t.add_argument("--alpha", type=_alpha, default=0.05, help="significance level in (0, 1) (default 0.05)")
    t.add_argument("--format", choices=("json", "csv", "text"), default="text", help="output format (default text)")
    t.add_argument("--header", action="store_true", help="skip the first line of each CSV")

    s = sub.add_parser("sweep", help="p-values over a gamma grid")
    _add_experiment_flags(s)
    _add_grid_flags(s)

    p = sub.add_parser("power", help="relative test against the split-sample baseline")
    _add_experiment_flags(p)
    _add_grid_flags(p)

    c = sub.add_parser("calibrate", help="p-value distribution at the null boundary")
    _add_experiment_flags(c, repetitions=200)
    c.add_argument("--geometry", choices=ex.CALIBRATION_GEOMETRIES, default="means", help="null configuration (default means)")

    i = sub.add_parser("isocurve", help="MMD pairs against the estimated joint Gaussian")
    _add_experiment_flags(i, m=1000, repetitions=200)
    i.add_argument("--gamma", type=float, default=0.5, help="position of X between Y and Z (default 0.5)")
    return parser


def _config(args, gammas, **extra):
    kw = dict(
        mu_y=args.mu_y, mu_z=args.mu_z, gammas=gammas, m=args.m, n=args.n, r=args.r,
        repetitions=args.repetitions, seed=args.seed, kernel=_kernel_name(args.kernel),
        bandwidth=None if args.bandwidth == "median" else args.bandwidth, alpha=args.alpha,
    )
    kw.update(extra)
    try:
        return ex.ExperimentConfig(**kw)
    except ValueError as exc:
        raise CliError(f"invalid configuration: {exc}", EXIT_USAGE) from None


def _grid(args):
    if args.gammas is not None:
        return args.gammas
    if args.gamma_count < 1:
        raise CliError("--gamma-count must be positive", EXIT_USAGE)
    return tuple(float(g) for g in np.linspace(args.gamma_min, args.gamma_max, args.gamma_count))


def _load(path, header):
    try:
        return read_matrix(path, header=header)
    except MatrixFileError as exc:
        raise CliError(str(exc), EXIT_MALFORMED) from None
    except (OSError, UnicodeDecodeError) as exc:
        raise CliError(f"cannot read {path}: {exc}", EXIT_UNREADABLE) from None


def cmd_test(args, out) -> int:
    X, Y, Z = (_load(path, args.header) for path in (args.ref, args.y, args.z))
    dims = {X.shape[1], Y.shape[1], Z.shape[1]}
    if len(dims) != 1:
        raise CliError(
            f"feature dimension mismatch: ref has {X.shape[1]}, y has {Y.shape[1]}, z has {Z.shape[1]} columns",
            EXIT_DIMENSION,
        )
    for name, A in (("ref", X), ("y", Y), ("z", Z)):
        if A.shape[0] < 3:
            raise CliError(f"{name} has {A.shape[0]} rows; at least 3 are required", EXIT_TOO_SMALL)
    try:
        result = relative_similarity_test(X, Y, Z, _kernel_name(args.kernel), args.bandwidth, args.alpha)
    except ValueError as exc:
        raise CliError(f"test failed: {exc}", EXIT_FAILURE) from None
    doc = result_document(result, (args.ref, args.y, args.z), (X.shape, Y.shape, Z.shape))
    out.write(format_document(doc, args.format))
    return EXIT_STATUS[result.decision]


SWEEP_COLUMNS = (
    "gamma", "mean_p", "rejection_rate_favor_z", "rejection_rate_favor_y",
    "inconclusive_rate", "mean_statistic", "mean_projected_sd",
)


def _sweep_rows(report, with_method=False):
    for row in report.rows:
        values = [getattr(row, c) for c in SWEEP_COLUMNS]
        yield ([report.method] + values) if with_method else values


def cmd_sweep(args, out) -> int:
    report = ex.gamma_sweep(_config(args, _grid(args)))
    write_report(args.out, "sweep", report.config.echo(), SWEEP_COLUMNS, _sweep_rows(report))
    return 0


def cmd_power(args, out) -> int:
    joint, split = ex.power_comparison(_config(args, _grid(args)))
    rows = list(_sweep_rows(joint, True)) + list(_sweep_rows(split, True))
    write_report(args.out, "power", joint.config.echo(), ("method",) + SWEEP_COLUMNS, rows)
    return 0


def cmd_calibrate(args, out) -> int:
    base = ex.calibration_config(args.geometry, m=args.m, repetitions=args.repetitions, seed=args.seed)
    cfg = _config(
        args, base.gammas, mu_y=base.mu_y, mu_z=base.mu_z,
        cov_x=base.cov_x, cov_y=base.cov_y, cov_z=base.cov_z, name=base.name,
    ) if args.geometry != "means" else _config(args, base.gammas, name=base.name)
    report = ex.calibration_run(cfg)
    summary = {
        "ks_statistic": report.ks_statistic,
        "ks_pvalue": report.ks_pvalue,
        "alpha_grid": report.alpha_grid,
        "false_positive_rates": report.false_positive_rates,
    }
    rows = ([rep, p] for rep, p in enumerate(report.p_values))
    write_report(args.out, "calibrate", cfg.echo(), ("repetition", "p_value"), rows, summary)
    return 0


def cmd_isocurve(args, out) -> int:
    report = ex.isocurve_validation(_config(args, (args.gamma,)))
    summary = {
        "kernel": report.kernel.family,
        "bandwidth": report.kernel.bandwidth,
        "center": report.center,
        "fraction_inside": report.fraction_inside,
        "mc_covariance": report.mc_covariance,
        "mean_analytic_covariance": report.mean_analytic_covariance,
    }
    cols = ("repetition", "mmd_xy", "mmd_xz", "var_xy", "var_xz", "cov_xyxz", "mahalanobis_sq")
    rows = (
        [rep, *report.pairs[rep], report.covariances[rep, 0, 0], report.covariances[rep, 1, 1],
         report.covariances[rep, 0, 1], report.mahalanobis_sq[rep]]
        for rep in range(len(report.pairs))
    )
    write_report(args.out, "isocurve", report.config.echo(), cols, rows, summary)
    return 0


COMMANDS = {
    "test": cmd_test,
    "sweep": cmd_sweep,
    "power": cmd_power,
    "calibrate": cmd_calibrate,
    "isocurve": cmd_isocurve,
}


def main(argv=None, out=None, err=None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    try:
        try:
            args = build_parser().parse_args(argv)
        except SystemExit as exc:  # --help / --version
            return int(exc.code or 0)
        try:
            return COMMANDS[args.command](args, out)
        except (OSError, PermissionError) as exc:
            if getattr(args, "out", None) is not None:
                raise CliError(f"cannot write {args.out}: {exc}", EXIT_UNWRITABLE) from None
            raise CliError(str(exc), EXIT_FAILURE) from None
        except (RuntimeError, ValueError) as exc:
            raise CliError(f"{args.command} failed: {exc}", EXIT_FAILURE) from None
    except CliError as exc:
        print(str(exc), file=err)
        return exc.status


if __name__ == "__main__":
    sys.exit(main())
