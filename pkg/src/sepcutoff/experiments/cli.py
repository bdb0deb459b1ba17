"""Command-line entry point: ``python -m sepcutoff <experiment> [flags]``."""
from __future__ import annotations

import argparse
import secrets
import sys

from .config import EXPERIMENTS, FORMATS, ConfigError, build_config, read_config_file
from .runners import execute


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sepcutoff", description="Exclusion-process cutoff experiments.")
    p.add_argument("experiment", choices=EXPERIMENTS)
    p.add_argument("--config", help="flat key = value file; flags override its entries")
    p.add_argument("--n", help="N or comma-separated list of N")
    p.add_argument("--s-grid", help="comma-separated s values")
    p.add_argument("--gamma-grid", help="comma-separated gamma values")
    p.add_argument("--alpha", type=float)
    p.add_argument("--theta", type=float)
    p.add_argument("--replicas", type=int)
    p.add_argument("--t-max", type=float)
    p.add_argument("--seed", help="master seed (decimal or 0x-prefixed hex)")
    p.add_argument("--entropy-seed", action="store_true",
                   help="draw the master seed from the OS when none is given (it is still recorded)")
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--format", choices=FORMATS)
    p.add_argument("--threads", type=int)
    return p


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    values = read_config_file(args.config) if args.config else {}
    flags = {k: v for k, v in vars(args).items() if k not in ("config", "entropy_seed")}
    values.update({k: v for k, v in flags.items() if v is not None})
    if "seed" not in values and args.entropy_seed:
        values["seed"] = secrets.randbits(64)
    try:
        cfg = build_config(values)
    except ConfigError as e:
        print(f"sepcutoff: {e}", file=sys.stderr)
        return 2
    try:
        execute(cfg)
    except KeyboardInterrupt:
        print("sepcutoff: interrupted; rows written so far are complete", file=sys.stderr)
        return 130
    return 0
