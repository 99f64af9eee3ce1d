"""Command line interface: ``elasticdepth <command> ...``."""

import argparse
import csv
import io
import json
import logging
import os
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .depth import depths_of
from .detect import CHANNELS, BoxplotConfig, report_from_depths
from .evaluate import DEFAULT_K_VALUES, f1_experiment, k_sensitivity_sweep, rank_experiment
from .io import labels_csv, load_trajectories, trajectory_csv
from .simulate import ScenarioSpec, sample_scenario

THREADS_ENV = "ELASTICDEPTH_THREADS"

log = logging.getLogger("elasticdepth")


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _count(text):
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a nonnegative integer, got {text}")
    return value


def _grid_size(text):
    value = int(text)
    if value < 3:
        raise argparse.ArgumentTypeError("grid needs at least 3 points")
    return value


def _k(text):
    value = float(text)
    if not (np.isfinite(value) and value > 0):
        raise argparse.ArgumentTypeError(f"k must be positive, got {text}")
    return value


def _p(text):
    value = float(text)
    if not 0 < value < 1:
        raise argparse.ArgumentTypeError(f"p must lie strictly between 0 and 1, got {text}")
    return value


def _seed(text):
    value = int(text)
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return value


def _model(text):
    if text == "sincos":
        return text
    if text.isdigit() and 1 <= int(text) <= 7:
        return int(text)
    raise argparse.ArgumentTypeError(f"model must be 1..7 or sincos, got {text}")


def _point(text):
    try:
        point = np.array([float(x) for x in text.split(",")])
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected x,y,z, got {text}") from None
    norm = np.linalg.norm(point)
    if point.shape != (3,) or not norm > 0:
        raise argparse.ArgumentTypeError(f"expected a nonzero point x,y,z, got {text}")
    return point / norm


def _default_threads():
    value = os.environ.get(THREADS_ENV)
    if not value:
        return 1
    try:
        return _positive_int(value)
    except (ValueError, argparse.ArgumentTypeError):
        raise SystemExit(f"error: {THREADS_ENV} must be a positive integer, got {value!r}") from None


def build_parser():
    parser = argparse.ArgumentParser(
        prog="elasticdepth",
        description="Elastic amplitude and phase depths and shape outlier detection.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument(
        "--threads", type=_positive_int, default=None,
        help=f"worker threads for pairwise alignment (default: ${THREADS_ENV} or 1)",
    )
    parser.add_argument("--quiet", action="store_true", help="suppress progress messages and warnings")
    sub = parser.add_subparsers(dest="command", required=True)

    def data_command(name, help):
        cmd = sub.add_parser(name, help=help)
        cmd.add_argument("file", help="trajectory CSV file")
        cmd.add_argument("--channel", choices=CHANNELS, default=None)
        cmd.add_argument(
            "--reference-point", type=_point, default=None, metavar="X,Y,Z",
            help="tangent point for S2 data (default: normalized mean of starting points)",
        )
        cmd.add_argument("--out", default=None, help="output path (default: stdout)")
        return cmd

    data_command("depth", "per-trajectory amplitude and phase depths as CSV")
    detect = data_command("detect", "depth boxplot outlier report as JSON")
    detect.add_argument("--k", type=_k, default=2.0, help="whisker multiplier (default 2.0)")
    detect.add_argument("--p", type=_p, default=None, help="also require depth below the 1-p quantile")

    simulate = sub.add_parser("simulate", help="simulate a labelled sample")
    simulate.add_argument("--model", type=_model, required=True, help="1..7 or sincos")
    simulate.add_argument("--inliers", type=_count, default=90)
    simulate.add_argument("--outliers", type=_count, default=10)
    simulate.add_argument("--grid", type=_grid_size, default=30)
    simulate.add_argument("--seed", type=_seed, default=0)
    simulate.add_argument("--no-phase-noise", action="store_true")
    simulate.add_argument("--no-magnitude-outliers", action="store_true")
    simulate.add_argument("--out", default=None, help="trajectory file (default: stdout)")
    simulate.add_argument("--labels", default=None, help="labels file (default: <out>.labels.csv)")

    bench = sub.add_parser("bench", help="seeded simulation experiments")
    bench.add_argument("experiment", choices=("f1", "rank", "ksweep"))
    bench.add_argument("--model", type=_model, required=True, help="1..7 or sincos")
    bench.add_argument("--reps", type=_positive_int, default=100)
    bench.add_argument("--seed", type=_seed, default=0)
    bench.add_argument("--k", type=_k, nargs="+", default=None,
                       help="whisker multiplier(s); one for f1 (default 1.8), several for ksweep")
    bench.add_argument("--p", type=_p, default=None)
    bench.add_argument("--grid", type=_grid_size, default=30)
    bench.add_argument("--no-undersampling", action="store_true",
                       help="skip the under-sampling demonstration of ksweep")
    bench.add_argument("--out", default=None,
                       help="write <out>.csv (per replication) and <out>.json (summary)")
    return parser


def _emit(text, out):
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _load(args):
    ids, trajectories = load_trajectories(args.file)
    if len(trajectories) < 2:
        raise ValueError("need at least two trajectories")
    log.info("read %d %s trajectories from %s", len(trajectories), trajectories[0].tag, args.file)
    reference = args.reference_point
    if reference is not None and trajectories[0].tag != "S2":
        raise ValueError("--reference-point only applies to S2 data")
    return ids, trajectories, depths_of(trajectories, reference=reference, threads=args.threads)


def cmd_depth(args):
    ids, _, depths = _load(args)
    channels = CHANNELS if args.channel is None else (args.channel,)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["id"] + [f"{c}_depth" for c in channels])
    for i, ident in enumerate(ids):
        writer.writerow([ident] + [repr(float(depths.channel(c)[i])) for c in channels])
    _emit(buf.getvalue(), args.out)


def cmd_detect(args):
    ids, _, depths = _load(args)
    report = report_from_depths(depths, BoxplotConfig(k=args.k, p=args.p), args.channel or "amplitude")
    out = report.to_dict()
    out["ids"] = ids
    out["outlier_ids"] = [ids[i] for i in out["outliers"]]
    _emit(json.dumps(out, indent=2) + "\n", args.out)


def cmd_simulate(args):
    spec = ScenarioSpec(
        model=args.model,
        n_inlier=args.inliers,
        n_outlier=args.outliers,
        grid_size=args.grid,
        seed=args.seed,
        **({"phase_noise_sigma": 0.0} if args.no_phase_noise else {}),
        **({"magnitude_outlier_fraction": 0.0} if args.no_magnitude_outliers else {}),
    )
    if spec.size < 1:
        raise ValueError("the sample is empty")
    sample = sample_scenario(spec)
    _emit(trajectory_csv(sample.trajectories), args.out)
    labels = args.labels
    if labels is None and args.out is not None:
        labels = str(Path(args.out).with_suffix("")) + ".labels.csv"
    if labels is not None:
        Path(labels).write_text(labels_csv(sample.shape_outlier_labels, sample.magnitude_outlier_labels))
        log.info("labels written to %s", labels)


def cmd_bench(args):
    common = dict(replications=args.reps, seed=args.seed, threads=args.threads, grid_size=args.grid)
    if args.experiment == "rank":
        report = rank_experiment(args.model, **common)
    elif args.experiment == "f1":
        k = 1.8 if args.k is None else args.k[0]
        if args.k is not None and len(args.k) > 1:
            raise ValueError("f1 takes a single --k")
        report = f1_experiment(args.model, config=BoxplotConfig(k=k, p=args.p), **common)
    else:
        k_values = DEFAULT_K_VALUES if args.k is None else args.k
        report = k_sensitivity_sweep(
            args.model, k_values=k_values, undersampling=not args.no_undersampling, **common
        )
    if args.out is None:
        sys.stdout.write(report.to_json())
        return
    Path(args.out + ".csv").write_text(report.to_csv())
    Path(args.out + ".json").write_text(report.to_json())
    log.info("wrote %s.csv and %s.json", args.out, args.out)


COMMANDS = {"depth": cmd_depth, "detect": cmd_detect, "simulate": cmd_simulate, "bench": cmd_bench}


def _configure_logging(quiet):
    if not any(getattr(h, "_cli", False) for h in log.handlers):
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter("%(message)s"))
        handler._cli = True
        log.addHandler(handler)
    log.setLevel(logging.WARNING if quiet else logging.INFO)


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.threads is None:
        args.threads = _default_threads()
    _configure_logging(args.quiet)
    try:
        with warnings.catch_warnings():
            if args.quiet:
                warnings.simplefilter("ignore")
            COMMANDS[args.command](args)
    except (ValueError, OSError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
