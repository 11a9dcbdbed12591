"""Run every JSON config in a directory and write its report under runs/<name>/."""
import argparse
import sys
from pathlib import Path

from ptlab.cli import main as cli


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("configs", nargs="?", default=str(Path(__file__).resolve().parent.parent / "configs"))
    ap.add_argument("--out", default="runs")
    args = ap.parse_args()
    failed = 0
    for path in sorted(Path(args.configs).glob("*.json")):
        print(f"== {path.name}")
        failed += cli(["run", str(path), "--out", str(Path(args.out) / path.stem)]) != 0
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
