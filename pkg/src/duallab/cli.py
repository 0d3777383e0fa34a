"""Command-line runner for the verification experiments.

Three commands: ``run`` executes one experiment, ``run-all`` executes a
suite on a small worker pool, ``list`` prints the registry.  Every run
writes a canonical JSON report and a JSONL check log under the output
directory (flag, else the environment variable, else ./duallab-out);
the process exits 0 exactly when every executed check passed.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .reporting import (
    OUTPUT_ENV_VAR,
    ExperimentConfig,
    ExperimentReport,
    default_output_dir,
    write_jsonl,
)
from .experiments import (
    EXPERIMENTS,
    SUITES,
    get_experiment,
    run_experiment,
    suite_configs,
)

MAX_WORKERS = 4


def _write_report(report: ExperimentReport, out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    payload = report.body()
    payload["duration_s"] = round(report.duration_s, 3)
    path = out_dir / f"{report.config.experiment}.report.json"
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")
    write_jsonl(out_dir / f"{report.config.experiment}.checks.jsonl", report.records())


def _print_report(report: ExperimentReport, verbose: bool) -> None:
    if verbose:
        for c in report.checks:
            mark = "PASS" if c.passed else "FAIL"
            print(f"  [{mark}] {c.name}: measured={c.measured} predicted={c.predicted}")
    status = "PASS" if report.passed else "FAIL"
    print(
        f"{report.config.experiment}: {status} "
        f"({len(report.checks)} checks, {report.duration_s:.2f}s)"
    )


def _cmd_run(args: argparse.Namespace) -> int:
    out_dir = Path(args.out) if args.out else default_output_dir()
    config = ExperimentConfig(
        experiment=args.experiment,
        N=args.n,
        p=args.p,
        q=args.q,
        seed=args.seed,
        samples=args.samples,
        out=out_dir,
    )
    report = run_experiment(config, out_dir=out_dir)
    _write_report(report, out_dir)
    _print_report(report, verbose=True)
    print(f"report: {out_dir / (args.experiment + '.report.json')}")
    return 0 if report.passed else 1


def _cmd_run_all(args: argparse.Namespace) -> int:
    out_dir = Path(args.out) if args.out else default_output_dir()
    configs = suite_configs(args.suite, seed=args.seed, out=out_dir)
    reports: dict[str, ExperimentReport] = {}
    with ThreadPoolExecutor(max_workers=MAX_WORKERS) as pool:
        futures = {
            cfg.experiment: pool.submit(run_experiment, cfg, out_dir)
            for cfg in configs
        }
        for name, fut in futures.items():
            reports[name] = fut.result()
    # single sink: write and print in registry order once all are done
    summary = []
    all_passed = True
    for cfg in configs:
        report = reports[cfg.experiment]
        _write_report(report, out_dir)
        _print_report(report, verbose=False)
        all_passed = all_passed and report.passed
        summary.append(
            {
                "experiment": cfg.experiment,
                "passed": report.passed,
                "checks": len(report.checks),
                "failed": [c.name for c in report.checks if not c.passed],
                "duration_s": round(report.duration_s, 3),
            }
        )
    summary_path = out_dir / "summary.json"
    summary_path.write_text(
        json.dumps(
            {"suite": args.suite, "seed": args.seed, "passed": all_passed,
             "experiments": summary},
            sort_keys=True,
            indent=2,
        )
        + "\n"
    )
    print(f"suite {args.suite}: {'PASS' if all_passed else 'FAIL'} ({summary_path})")
    return 0 if all_passed else 1


def _cmd_list(args: argparse.Namespace) -> int:
    for spec in EXPERIMENTS.values():
        defaults = ", ".join(f"{k}={v}" for k, v in spec.defaults.items())
        print(f"{spec.name:20s} {spec.summary} [{defaults}]")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="duallab",
        description="reproducible verification experiments",
        epilog=f"default output directory: flag --out, else ${OUTPUT_ENV_VAR}, "
        "else ./duallab-out",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one experiment")
    run.add_argument("experiment", choices=list(EXPERIMENTS))
    run.add_argument("--n", type=int, default=None, help="leg dimension")
    run.add_argument("--p", type=int, default=None, help="left leg count")
    run.add_argument("--q", type=int, default=None, help="right leg count")
    run.add_argument("--seed", type=int, default=20240)
    run.add_argument("--samples", type=int, default=None)
    run.add_argument("--out", type=str, default=None)
    run.set_defaults(func=_cmd_run)

    run_all = sub.add_parser("run-all", help="run a whole suite")
    run_all.add_argument("--suite", choices=list(SUITES), default="smoke")
    run_all.add_argument("--seed", type=int, default=20240)
    run_all.add_argument("--out", type=str, default=None)
    run_all.set_defaults(func=_cmd_run_all)

    lst = sub.add_parser("list", help="list the registered experiments")
    lst.set_defaults(func=_cmd_list)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entry() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
