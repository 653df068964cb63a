"""Run one or more experiments with their shipped configs and print each check.

    python3 scripts/run_experiment.py decompose born --out runs
"""
import argparse
from pathlib import Path

from qclab.cli import run_one
from qclab.config import SUBCOMMANDS, load_config


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("names", nargs="*", default=list(SUBCOMMANDS), choices=SUBCOMMANDS)
    ap.add_argument("--out", type=Path, default=Path("runs"))
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    for name in args.names:
        summary = run_one(name, load_config(name), args.out / name, args.seed)
        print(f"{name:12s} {summary['status']:16s} exit={summary['exit_code']}"
              + (f"  failed: {', '.join(summary['failed_checks'])}" if summary["failed_checks"]
                 else ""))


if __name__ == "__main__":
    main()
