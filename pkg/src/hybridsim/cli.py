"""Command-line interface: run, compare, validate."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .engine import SEC
from .errors import HybridSimError
from .experiment import (compare_table, modes_csv, parse_spec, rates_csv,
                         report_txt, run_experiment)


def _load_spec(path: str, seed=None, end=None):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise HybridSimError(f"cannot read {path}: {exc}") from exc
    spec = parse_spec(text)
    if seed is not None:
        spec.seed = seed
    if end is not None:
        spec.end = int(end * SEC)
    spec.validate()
    return spec


def _write_outputs(report, out_dir: Path):
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "rates.csv").write_text(rates_csv(report), encoding="utf-8")
    (out_dir / "modes.csv").write_text(modes_csv(report), encoding="utf-8")
    (out_dir / "report.txt").write_text(report_txt(report), encoding="utf-8")


def cmd_run(args) -> int:
    spec = _load_spec(args.spec, args.seed, args.end)
    report = run_experiment(spec)
    _write_outputs(report, Path(args.out))
    print(f"wrote rates.csv, modes.csv, report.txt to {args.out}")
    print(f"final clock {report.engine.final_clock / SEC:.3f}s, "
          f"wall {report.run_wall_seconds:.3f}s, "
          f"steady aggregate {report.steady_mean_aggregate() / 1e9:.3f} Gbps")
    return 0


def cmd_compare(args) -> int:
    if len(args.spec) < 2:
        print("error: compare needs >= 2 spec files", file=sys.stderr)
        return 2
    out_dir = Path(args.out)
    reports = []
    failed = None
    for path in args.spec:
        try:
            spec = _load_spec(path)
            report = run_experiment(spec)
        except HybridSimError as exc:
            failed = (path, exc)
            break
        reports.append(report)
        sub = out_dir / Path(path).stem
        _write_outputs(report, sub)
    table = compare_table(reports)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "comparison.csv").write_text(table, encoding="utf-8")
    print(table, end="")
    if failed is not None:
        print(f"error: run of {failed[0]} failed: {failed[1]} "
              f"(partial table above)", file=sys.stderr)
        return 1
    return 0


def cmd_validate(args) -> int:
    _load_spec(args.spec)
    print(f"{args.spec}: valid")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="hybridsim",
        description="Hybrid control-plane/data-plane network experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a single experiment")
    p_run.add_argument("spec")
    p_run.add_argument("--out", default="out")
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--end", type=float, default=None,
                       help="override end time (virtual seconds)")
    p_run.set_defaults(fn=cmd_run)

    p_cmp = sub.add_parser("compare", help="run several experiments and tabulate")
    p_cmp.add_argument("spec", nargs="+")
    p_cmp.add_argument("--out", default="out")
    p_cmp.set_defaults(fn=cmd_compare)

    p_val = sub.add_parser("validate", help="check a spec file")
    p_val.add_argument("spec")
    p_val.set_defaults(fn=cmd_validate)

    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except HybridSimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
