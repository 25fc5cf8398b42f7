"""Run every scenario config under configs/ through the CLI.

    python scripts/reproduce_all.py [--out results] [--parallel 4] [--only evolve nv_sweep]

Each scenario writes its CSV tables and a .meta.json file into --out.
A run summary (wall time and exit code per scenario) is printed at the end.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from nhsqueeze import cli

ROOT = Path(__file__).resolve().parents[1]


def main() -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--configs", type=Path, default=ROOT / "configs")
    p.add_argument("--out", type=Path, default=ROOT / "results")
    p.add_argument("--parallel", type=int, default=1)
    p.add_argument("--only", nargs="*", help="config stems to run")
    args = p.parse_args()

    paths = sorted(args.configs.glob("*.json"))
    if args.only:
        paths = [q for q in paths if q.stem in args.only]
    status = []
    for path in paths:
        scenario = json.loads(path.read_text())["scenario"]
        t0 = time.perf_counter()
        code = cli.main([scenario, "--config", str(path), "--out", str(args.out), "--parallel", str(args.parallel)])
        status.append((path.stem, code, time.perf_counter() - t0))

    width = max((len(s) for s, _, _ in status), default=0)
    for stem, code, dt in status:
        print(f"{stem:<{width}}  exit={code}  {dt:8.1f} s")
    return max((c for _, c, _ in status), default=0)


if __name__ == "__main__":
    sys.exit(main())
