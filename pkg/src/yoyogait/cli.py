"""Command-line entry point: ``yoyogait {estimate,simulate,validate,benchmark}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

from . import kernels
from .config import load_config
from .pipeline import (
    format_record,
    load_profile,
    read_input_csv,
    run_benchmark,
    run_estimate,
    run_simulate,
    velocities_from_input,
)
from .spectral_validation import validate_recording
from .yoyo_model import YoyoParams


def _noise(text: str):
    parts = [float(p) for p in text.split(",")]
    if len(parts) == 1:
        return parts[0]
    if len(parts) == 2:
        return tuple(parts)
    raise argparse.ArgumentTypeError("noise is one value or 'vx,vz'")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="yoyogait", description="Online gait frequency and cycloid-radius estimation."
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log diagnostics to stderr")
    sub = parser.add_subparsers(dest="mode", required=True)

    p = sub.add_parser("estimate", help="run the estimator over a position or velocity CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--config", default=None, help="key = value config file")
    p.add_argument("--metrics", default=None, help="write error metrics to this file")
    p.add_argument("--skip-seconds", type=float, default=0.0,
                   help="exclude this much leading data from the metrics")
    p.add_argument("--backend", default="auto", choices=["auto", "compiled", "python"])

    p = sub.add_parser("simulate", help="write a synthetic Yoyo-model velocity CSV")
    p.add_argument("--R", type=float, required=True, dest="R", help="outer radius, m")
    p.add_argument("--r", type=float, required=True, dest="r", help="inner radius, m")
    p.add_argument("--profile", required=True, help="walk profile file")
    p.add_argument("--noise", type=_noise, default=0.0, help="velocity noise std, m/s")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--T", type=float, default=0.04, dest="T", help="sampling time, s")
    p.add_argument("--duration", type=float, default=None,
                   help="seconds to simulate (default: profile length)")

    p = sub.add_parser("validate", help="DFT check of the -90 degree forward/vertical offset")
    p.add_argument("--input", required=True)
    p.add_argument("--config", default=None)
    p.add_argument("--json", action="store_true", help="emit a JSON record")

    p = sub.add_parser("benchmark", help="time one estimator step per sample")
    p.add_argument("--iters", type=int, default=100_000)
    p.add_argument("--backend", default="both", choices=["auto", "compiled", "python", "both"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", action="store_true")
    return parser


def _cmd_estimate(args) -> int:
    _, metrics = run_estimate(
        args.input, args.output, args.config, args.metrics, args.skip_seconds, args.backend
    )
    sys.stdout.write(format_record(metrics.as_dict()))
    return 0


def _cmd_simulate(args) -> int:
    params = YoyoParams(args.R, args.r)
    profile = load_profile(args.profile)
    t, _, _ = run_simulate(params, profile, args.noise, args.seed, args.out, args.T, args.duration)
    sys.stdout.write(f"wrote {t.size} samples to {args.out}\n")
    return 0


def _cmd_validate(args) -> int:
    config = load_config(args.config)
    kind, cols = read_input_csv(args.input)
    t, vx, vz = velocities_from_input(kind, cols, config)
    report = validate_recording(np.column_stack([t, vx, vz]), rate=1.0 / config.T)
    record = report.as_dict()
    if args.json:
        sys.stdout.write(json.dumps(record, sort_keys=False) + "\n")
    else:
        sys.stdout.write(format_record(record))
    return 0 if report.passed else 1


def _cmd_benchmark(args) -> int:
    if args.backend == "both":
        backends = tuple(sorted(kernels.available_backends()))
    else:
        backends = (args.backend,)
    results = run_benchmark(args.iters, backends, args.seed)
    if args.json:
        sys.stdout.write(json.dumps(results) + "\n")
        return 0
    sys.stdout.write(f"{'backend':<10} {'iters':>9} {'mean_us':>9} {'p99_us':>9} "
                     f"{'batch_us':>9} {'x_realtime':>11}\n")
    for name, rep in results.items():
        sys.stdout.write(
            f"{name:<10} {rep['iterations']:>9d} {rep['mean_us']:>9.3f} {rep['p99_us']:>9.3f} "
            f"{rep.get('batch_mean_us', float('nan')):>9.3f} {rep['realtime_factor']:>11.0f}\n"
        )
    return 0


_COMMANDS = {
    "estimate": _cmd_estimate,
    "simulate": _cmd_simulate,
    "validate": _cmd_validate,
    "benchmark": _cmd_benchmark,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return _COMMANDS[args.mode](args)
    except (OSError, ValueError, ArithmeticError) as exc:
        sys.stderr.write(f"yoyogait {args.mode}: error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
