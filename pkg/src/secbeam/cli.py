"""Command line interface: run, validate and list the shipped experiments."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .harness import EXPERIMENTS, SpecError, parse_spec_file, run_experiment, validate_spec


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="secbeam",
        description="Monte Carlo experiments for beamforming with artificial-noise jamming",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run an experiment spec file")
    run_p.add_argument("spec", help="path to a .spec file")
    run_p.add_argument("--trials", type=int, default=None,
                       help="override the trial count from the spec")
    run_p.add_argument("--seed", type=int, default=None,
                       help="override the RNG seed from the spec")
    run_p.add_argument("--workers", type=int, default=1,
                       help="worker processes (results are worker-count independent)")
    run_p.add_argument("--out", default=None,
                       help="output path (default: <spec stem>_results.<format>)")
    run_p.add_argument("--format", choices=("csv", "json"), default="csv")

    sub.add_parser("list-experiments", help="list known experiment identifiers")

    val_p = sub.add_parser("validate", help="check a spec file without running it")
    val_p.add_argument("spec", help="path to a .spec file")
    return parser


def _cmd_run(args):
    spec = parse_spec_file(args.spec)
    table = run_experiment(spec, trials=args.trials, seed=args.seed,
                           workers=args.workers)
    out = args.out
    if out is None:
        out = str(Path(args.spec).with_suffix("")) + f"_results.{args.format}"
    text = table.to_csv() if args.format == "csv" else table.to_json()
    if out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")
        print(f"{table.experiment}: {len(table.rows)} rows -> {out}")
    if table.metadata.get("n_failed"):
        print(f"warning: {table.metadata['n_failed']} failed trial(s)",
              file=sys.stderr)
        return 1
    return 0


def _cmd_validate(args):
    spec = parse_spec_file(args.spec)  # raises SpecError with details
    problems = validate_spec(spec)
    if problems:
        for p in problems:
            print(f"error: {p}", file=sys.stderr)
        return 2
    print(f"{args.spec}: ok ({spec.experiment}, trials={spec.trials})")
    return 0


def _cmd_list(_args):
    width = max(len(name) for name in EXPERIMENTS)
    for name in sorted(EXPERIMENTS):
        print(f"{name:<{width}}  {EXPERIMENTS[name].description}")
    return 0


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "validate":
            return _cmd_validate(args)
        return _cmd_list(args)
    except SpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
