"""Command-line batch runner for presets and custom sweeps."""

from __future__ import annotations

import argparse
import sys

from .config import build_config, validate_config
from .experiments import PRESETS, ExperimentSpec, parse_sweep, run_preset, write_outputs


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="risbeam", description="RIS beam-training experiments")
    p.add_argument("--config", help="scenario file (section.key = value)")
    p.add_argument("--preset", default="custom", choices=PRESETS)
    p.add_argument("--sweep", help="key=start:stop:steps[:log]")
    p.add_argument("--strategies", default="fs,hs,ts", help="comma-separated subset of fs,hs,ts")
    p.add_argument("--trials", type=int, help="channel draws per point")
    p.add_argument("--frames", type=int, help="frames per draw")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="results")
    p.add_argument("--strict", action="store_true", help="exit nonzero if any frame is infeasible")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--validate", action="store_true", help="only validate --config and echo it")
    p.add_argument("--quiet", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.config:
        ec, errors = validate_config(args.config)
    else:
        ec, errors = build_config({})
    if errors:
        for e in errors:
            print(f"config error: {e}", file=sys.stderr)
        return 2
    if args.validate:
        for k, v in sorted(ec.echo().items()):
            print(f"{k} = {v}")
        return 0
    strategies = tuple(s.strip().upper() for s in args.strategies.split(",") if s.strip())
    bad = [s for s in strategies if s not in ("FS", "HS", "TS")]
    if bad or not strategies:
        print(f"error: unknown strategies {bad}", file=sys.stderr)
        return 2
    if args.workers < 1:
        print("error: --workers must be >= 1", file=sys.stderr)
        return 2
    try:
        sweep = parse_sweep(args.sweep) if args.sweep else None
        spec = ExperimentSpec(preset=args.preset, sweep=sweep, strategies=strategies, trials=args.trials,
                              seed=args.seed, out=args.out, workers=args.workers, config=ec,
                              max_frames=args.frames, progress=not args.quiet)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    result = run_preset(spec, write=False)
    try:
        paths = write_outputs(spec, result)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    if not args.quiet:
        for path in paths:
            print(path)
    if args.strict and result.infeasible_frames:
        print(f"strict: {result.infeasible_frames} infeasible frames", file=sys.stderr)
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())
