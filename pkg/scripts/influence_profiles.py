"""Write psi-function profiles for the one-covariate, four-category setting.

Produces one CSV per (link, method) under --out, ready for plotting.
"""

import argparse
from pathlib import Path

import numpy as np

from robord.inference import figure1_params, influence_profile
from robord.model import Method


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("results/profiles"))
    ap.add_argument("--y", type=int, default=1)
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    grid = np.round(np.arange(-10, 10.0001, 0.1), 10)
    methods = [Method.ml(), Method.dp(0.3), Method.dp(0.5), Method.gamma(0.3), Method.gamma(0.5)]
    for link in ("probit", "logit"):
        for m in methods:
            prof = influence_profile(m, figure1_params(), link, args.y, grid)
            suffix = "" if m.tuning is None else f"{m.tuning:g}"
            name = f"{link}_{m.kind}{suffix}.csv"
            (args.out / name).write_text(prof.to_csv())
            peak = np.max(np.abs(prof.column("beta1")))
            print(f"{link:7s} {m.label:11s} max|psi_beta| = {peak:.4f} -> {name}")


if __name__ == "__main__":
    main()
