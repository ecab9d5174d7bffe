"""Run a batch of simulation scenarios and write one metrics CSV per scenario.

    python3 scripts/run_tables.py scripts/scenarios/probit_*.json --out results/ [--S 1000]
"""

import argparse
import dataclasses
import logging
import time
from pathlib import Path

from robord.sim import load_scenario, run_study


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("scenarios", nargs="+", type=Path)
    ap.add_argument("--out", type=Path, default=Path("results"))
    ap.add_argument("--S", type=int, help="override the replication count")
    ap.add_argument("--workers", type=int)
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    args.out.mkdir(parents=True, exist_ok=True)
    for path in args.scenarios:
        scn, methods = load_scenario(path)
        if args.S:
            scn = dataclasses.replace(scn, S=args.S)
        t0 = time.perf_counter()
        result = run_study(scn, methods, workers=args.workers)
        target = args.out / (path.stem + ".csv")
        with open(target, "w", newline="") as fh:
            result.to_csv(fh)
        print(f"{path.name}: S={scn.S} in {time.perf_counter() - t0:.0f}s -> {target}")
        for m in result.metrics:
            print(f"  {m.label:14s} |bias b1| {m.abs_bias[0]:.4f}  mse b1 {m.mse[0]:.4f}  ccr {m.ccr:.4f}")


if __name__ == "__main__":
    main()
