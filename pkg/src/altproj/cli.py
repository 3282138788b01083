"""Command-line front end: ``altproj run|validate|builtins``."""

from __future__ import annotations

import argparse
import os
import sys

from .builtins import listing
from .errors import DomainError, NumericalFailure, ScenarioError
from .scenario import load, run

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC = 0, 2, 3


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="altproj", description="Alternating projections: regularity constants, runs and rate-bound verdicts.")
    sub = p.add_subparsers(dest="verb", required=True)
    r = sub.add_parser("run", help="run a scenario file or built-in name")
    r.add_argument("scenario")
    r.add_argument("--out-dir", default=None, help="output root (default $ALTPROJ_OUT_DIR or ./altproj-out)")
    r.add_argument("--jobs", type=int, default=1, help="parallel (seed, radius) runs")
    r.add_argument("--seed-override", type=int, default=None, help="replace run and sampling seeds")
    r.add_argument("--tol", type=float, default=None, help="override the stopping tolerance")
    v = sub.add_parser("validate", help="parse and validate a scenario without running it")
    v.add_argument("scenario")
    sub.add_parser("builtins", help="list built-in scenarios")
    return p


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    if args.verb == "builtins":
        sys.stdout.write(listing())
        return EXIT_OK
    try:
        sc = load(args.scenario)
        if args.verb == "validate":
            print(f"{sc.name}: ok")
            return EXIT_OK
        if args.jobs < 1:
            raise ScenarioError("--jobs must be at least 1")
        if args.tol is not None:
            if not args.tol > 0:
                raise ScenarioError("--tol must be positive")
            sc.tol = args.tol
        if args.seed_override is not None:
            sc.seeds = (args.seed_override,)
            sc.sampling.seed = args.seed_override
        out = args.out_dir or os.environ.get("ALTPROJ_OUT_DIR") or "altproj-out"
        run(sc, out, args.jobs)
    except (ScenarioError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    print(f"wrote {os.path.join(out, sc.name)}")
    return EXIT_OK
