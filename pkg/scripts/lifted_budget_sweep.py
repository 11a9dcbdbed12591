"""Error of the lifted tester under greedy block corruption as the per-query budget t grows.

r is fixed, so larger t eventually breaks the budget hypothesis; the table
shows where the error starts to climb.
"""
import argparse

from ptlab.harness import ExperimentConfig, run_trials


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--r", type=int, default=57600)
    ap.add_argument("--trials", type=int, default=300)
    ap.add_argument("--ts", type=int, nargs="+", default=[0, 1, 2, 8, 32, 128])
    args = ap.parse_args()
    print(f"{'t':>5s} {'hypothesis':>10s} {'error':>7s} {'corrupted seen':>14s}")
    for t in args.ts:
        cfg = ExperimentConfig.from_dict(dict(
            property=f"lift:zero-string:r={args.r}", tester="lifted:base=zero-string", n=64 * args.r, m=64,
            eps=0.5, mode="online-corrupt" if t else "standard", t=t,
            adversary="greedy-block" if t else "null", instance="member", trials=args.trials))
        stats, _ = run_trials(cfg)
        held = cfg.hypotheses().get("lifting_budget", True)
        print(f"{t:5d} {str(held):>10s} {stats.error_rate:7.3f} {stats.corruption_hit_rate:14.3f}")


if __name__ == "__main__":
    main()
