"""Worst-case non-erased queries left by seed elimination, against the cap, for each rbits and t."""
import argparse

from ptlab.adversaries import seed_cap
from ptlab.harness import verify_seed_cap
from ptlab.suites import seed_cap_testers


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--runs", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    print(f"{'tester':36s} {'rbits':>5s} {'t':>3s} {'worst':>5s} {'cap':>4s}")
    for rbits in (8, 10, 16):
        for tester, x in seed_cap_testers(rbits):
            for t in (1, 3, 7):
                rep = verify_seed_cap(tester, x, t, args.runs, master_seed=args.seed)
                print(f"{tester.name:36s} {rbits:5d} {t:3d} {rep.max_non_erased:5d} {seed_cap(rbits, t):4d}")


if __name__ == "__main__":
    main()
