"""Command-line runner: ``qclab <subcommand> [--config PATH] [--out DIR]``.

Exit codes: 0 every check passed, 1 some check failed, 2 invalid config,
3 numerical abort.
"""
from __future__ import annotations

import argparse
import json
import logging
import platform
import sys
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .config import SUBCOMMANDS, load_config
from .errors import ConfigError, NumericalAbort
from .experiments import RUNNERS

EXIT_OK, EXIT_FAILED, EXIT_CONFIG, EXIT_ABORT = 0, 1, 2, 3

logger = logging.getLogger("qclab")


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"


def run_one(name: str, cfg: dict, out: Path, seed: int = 0, strict: bool = False) -> dict:
    """Run a subcommand and write its report; returns a summary with the exit code."""
    out.mkdir(parents=True, exist_ok=True)
    started = time.perf_counter()
    stamp = datetime.now(timezone.utc).isoformat()
    report = {"subcommand": name, "config": cfg, "seed": seed, "strict": strict}
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            outcome = RUNNERS[name](cfg, out, seed)
        except NumericalAbort as exc:
            report.update(status="numerical-abort", error=f"{type(exc).__name__}: {exc}",
                          passed=False)
            code = EXIT_ABORT
            outcome = None
        except (ConfigError, KeyError, TypeError, ValueError) as exc:
            report.update(status="config-invalid", error=f"{type(exc).__name__}: {exc}",
                          passed=False)
            code = EXIT_CONFIG
            outcome = None
    warned = sorted({f"{w.category.__name__}: {w.message}" for w in caught})
    if outcome is not None:
        passed = outcome.passed and not (strict and warned)
        report.update(status="passed" if passed else "failed",
                      checks=[c.to_dict() for c in outcome.checks],
                      observations=outcome.observations, files=sorted(outcome.files),
                      passed=passed)
        code = EXIT_OK if passed else EXIT_FAILED
    report["warnings"] = warned
    (out / "report.json").write_text(_dump(report))
    meta = {"subcommand": name, "started_utc": stamp,
            "wall_seconds": time.perf_counter() - started, "python": platform.python_version(),
            "numpy": np.__version__}
    (out / "meta.json").write_text(_dump(meta))
    return {"subcommand": name, "exit_code": code, "status": report["status"],
            "failed_checks": [c["name"] for c in report.get("checks", []) if not c["passed"]]}


def _run_task(args) -> dict:
    name, cfg, out, seed, strict = args
    return run_one(name, cfg, Path(out), seed, strict)


def run_all(out: Path, seed: int = 0, strict: bool = False, parallel: bool = False) -> int:
    started = time.perf_counter()
    tasks = [(name, load_config(name), str(out / name), seed, strict) for name in SUBCOMMANDS]
    if parallel:
        with ProcessPoolExecutor() as pool:
            results = list(pool.map(_run_task, tasks))
    else:
        results = [_run_task(t) for t in tasks]
    code = max(r["exit_code"] for r in results)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(_dump({"subcommand": "all", "results": results,
                                            "passed": code == EXIT_OK}))
    (out / "meta.json").write_text(_dump({"wall_seconds": time.perf_counter() - started,
                                          "started_utc": datetime.now(timezone.utc).isoformat()}))
    for r in results:
        print(f"{r['subcommand']:<12s} {r['status']}"
              + (f"  failed: {', '.join(r['failed_checks'])}" if r["failed_checks"] else ""))
    return code


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qclab", description=__doc__.splitlines()[0])
    ap.add_argument("subcommand", choices=SUBCOMMANDS + ("all",))
    ap.add_argument("--config", help="JSON file merged onto the shipped defaults")
    ap.add_argument("--out", default="results", help="output directory")
    ap.add_argument("--seed", type=int, default=0, help="seed for randomized suites")
    ap.add_argument("--parallel", action="store_true", help="run independent experiments concurrently")
    ap.add_argument("--strict", action="store_true", help="treat warnings as failures")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    out = Path(args.out)
    if args.subcommand == "all":
        if args.config:
            print("--config is not accepted with 'all'; it runs the shipped defaults",
                  file=sys.stderr)
            return EXIT_CONFIG
        return run_all(out, args.seed, args.strict, args.parallel)
    try:
        cfg = load_config(args.subcommand, args.config)
    except ConfigError as exc:
        print(f"config invalid: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    summary = run_one(args.subcommand, cfg, out, args.seed, args.strict)
    print(f"{summary['subcommand']}: {summary['status']}"
          + (f" (failed: {', '.join(summary['failed_checks'])})" if summary["failed_checks"] else ""))
    return summary["exit_code"]


if __name__ == "__main__":
    sys.exit(main())
