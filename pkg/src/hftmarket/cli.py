"""Command line entry point: ``hftmarket run|sweep|validate|replay``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from typing import Optional, Sequence

from .engine import MarketParams, run
from .harness import (
    PRESETS,
    VARIANTS,
    SweepSpec,
    emit,
    load_config,
    load_manifest,
    parse_assignments,
    run_sweep,
    scaled,
    validate_stylized,
    write_csv,
)
from .metrics import report, replay


def _params(args) -> MarketParams:
    values = {}
    if args.config:
        values.update(load_config(args.config))
    values.update(parse_assignments(args.set or [], "--set"))
    if getattr(args, "seed", None) is not None:
        values["seed"] = args.seed
    params = MarketParams(**values)
    if args.scale != 1.0:
        params = scaled(params, args.scale)
    return params


def _print_report(rep) -> None:
    print(json.dumps(rep.to_dict(), indent=2))


def _cmd_run(args) -> int:
    params = _params(args)
    if args.hft is not None:
        params = replace(params, hft_enabled=args.hft == "with")
    if args.event_log:
        with open(args.event_log, "w", encoding="utf-8") as fh:
            trace = run(params, log=fh)
    else:
        trace = run(params)
    _print_report(report(trace, volatility_interval=args.volatility_interval))
    return 0


def _cmd_sweep(args) -> int:
    if args.manifest:
        spec = load_manifest(args.manifest)
    else:
        if not args.param:
            raise ValueError("sweep needs --param (or --manifest)")
        if args.values:
            values = tuple(float(v) for v in args.values.split(","))
        else:
            preset = PRESETS[args.preset]
            if args.param not in preset:
                raise ValueError(f"preset {args.preset!r} has no values for {args.param!r}")
            values = preset[args.param]
        spec = SweepSpec(
            param=args.param,
            values=values,
            runs=args.runs,
            base=_params(args),
            variants=VARIANTS[args.hft],
            master_seed=args.seed if args.seed is not None else 0,
            volatility_interval=args.volatility_interval,
        )
    rep = run_sweep(spec)
    if args.out:
        csv_path, manifest = emit(rep, args.out)
        print(f"wrote {csv_path} and {manifest}", file=sys.stderr)
    else:
        write_csv(rep, sys.stdout)
    return 0


def _cmd_validate(args) -> int:
    params = replace(_params(args), hft_enabled=args.hft == "with")
    check = validate_stylized(params, runs=args.runs, master_seed=args.seed or 0)
    print(
        json.dumps(
            {
                "passed": check.passed,
                "kurtosis": check.kurtosis,
                "sq_return_autocorr": check.sq_return_autocorr,
            },
            indent=2,
        )
    )
    return 0 if check.passed else 1


def _cmd_replay(args) -> int:
    _print_report(report(replay(args.event_log)))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hftmarket", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="file of 'name = value' lines")
        p.add_argument("--set", action="append", metavar="NAME=VALUE", help="override one parameter")
        p.add_argument("--scale", type=float, default=1.0, help="multiply t_end (whole days only)")
        p.add_argument("--seed", type=int)

    def vol_interval(p):
        p.add_argument(
            "--volatility-interval", type=int, default=1, metavar="STEPS", help="return horizon for volatility"
        )

    p = sub.add_parser("run", help="single run; prints the liquidity report")
    common(p)
    p.add_argument("--hft", choices=("with", "without"))
    p.add_argument("--event-log", help="write the order event log here")
    vol_interval(p)
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("sweep", help="one-parameter sweep over several seeds")
    common(p)
    p.add_argument("--param")
    p.add_argument("--preset", choices=sorted(PRESETS), default="table2")
    p.add_argument("--values", help="comma separated values instead of a preset")
    p.add_argument("--runs", type=int, default=100)
    p.add_argument("--hft", choices=sorted(VARIANTS), default="both")
    p.add_argument("--out", help="CSV path; a .manifest.json is written beside it")
    p.add_argument("--manifest", help="re-run the sweep recorded in this manifest")
    vol_interval(p)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("validate", help="stylized-facts gate; exit 1 on failure")
    common(p)
    p.add_argument("--runs", type=int, default=10)
    p.add_argument("--hft", choices=("with", "without"), default="without")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("replay", help="metrics from an event log")
    p.add_argument("event_log")
    p.set_defaults(func=_cmd_replay)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR, format="%(message)s")
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"hftmarket: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
