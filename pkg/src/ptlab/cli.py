"""Command line entry point: ``ptlab run|verify|list|oracle-check``."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .adversaries import ADVERSARY_KINDS
from .bruteforce import oracle_check
from .harness import ConfigError, emit_report, load_config, prepare_instance, run_trials
from .properties import PROPERTY_KINDS
from .suites import SUITES, run_suite
from .testers import TESTER_KINDS

LISTINGS = {
    "properties": PROPERTY_KINDS,
    "testers": TESTER_KINDS,
    "adversaries": ADVERSARY_KINDS,
}


def cmd_run(args) -> int:
    try:
        cfg = load_config(args.config)
    except (ConfigError, OSError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    out = Path(args.out) if args.out else Path("runs") / Path(args.config).stem
    stats, records = run_trials(cfg, prepare_instance(cfg))
    summary = emit_report(cfg, stats, records, out)
    if stats.mean_estimate is not None:
        print(f"{stats.trials} trials, mean estimate {stats.mean_estimate:.5f}, max queries {stats.max_queries}")
    else:
        print(f"{stats.trials} trials, acceptance {stats.acceptance_rate:.4f} "
              f"(99% CI {stats.acceptance_ci[0]:.4f}-{stats.acceptance_ci[1]:.4f}), "
              f"error {stats.error_rate:.4f}, max queries {stats.max_queries}")
    for name, held in summary["hypotheses"].items():
        print(f"hypothesis {name}: {held}")
    failed = [name for name, ok in summary["assertions"].items() if not ok]
    for name, ok in summary["assertions"].items():
        print(f"[{'PASS' if ok else 'FAIL'}] {name} = {cfg.expect[name]}")
    print(f"wrote {out / 'trials.csv'} and {out / 'summary.json'}")
    return 1 if failed else 0


def cmd_verify(args) -> int:
    names = list(SUITES) if args.suite == "all" else [args.suite]
    failed = 0
    for name in names:
        result = run_suite(name, seed=args.seed)
        print(result.summary())
        if args.verbose or not result.passed:
            print("\n".join(result.lines))
        failed += not result.passed
    return 1 if failed else 0


def cmd_list(args) -> int:
    for name, doc in LISTINGS[args.what].items():
        print(f"{name:20s} {doc}")
    return 0


def cmd_oracle_check(args) -> int:
    strings = bad = 0
    for res in oracle_check(args.n_max, args.sigma_max):
        strings += res.strings
        if res.mismatches:
            bad += res.mismatches
            print(f"MISMATCH {res.prop} n={res.n} sigma={res.sigma}: {res.mismatches}, e.g. {res.first_mismatch}")
    print(f"checked {strings} strings, {bad} mismatches")
    return 1 if bad else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ptlab", description="Property testers under erasures and corruptions.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run an experiment config (JSON) and write trials.csv + summary.json")
    p.add_argument("config")
    p.add_argument("--out", help="output directory (default runs/<config stem>)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("verify", help="run a verification suite")
    p.add_argument("suite", choices=[*SUITES, "all"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-v", "--verbose", action="store_true")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("list", help="list registered components")
    p.add_argument("what", choices=list(LISTINGS))
    p.set_defaults(func=cmd_list)

    p = sub.add_parser("oracle-check", help="compare exact distances with brute force on all small strings")
    p.add_argument("n_max", type=int)
    p.add_argument("sigma_max", type=int)
    p.set_defaults(func=cmd_oracle_check)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
