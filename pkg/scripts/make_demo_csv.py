"""Write a contaminated demo CSV and its column spec for trying the CLI.

    python3 scripts/make_demo_csv.py demo/   # -> demo/data.csv, demo/spec.json
"""

import json
import sys
from pathlib import Path

import numpy as np

from robord.sim import SimScenario, contaminate, gen_dataset, stream


def main():
    out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo")
    out.mkdir(parents=True, exist_ok=True)
    clean, _ = gen_dataset(SimScenario(), stream(0, 0, 0))
    data = contaminate(clean, 0.05, 20.0, 1.0, stream(0, 0, 1))
    group = np.where(data.X[:, 1] == 1, "treated", "control")
    rows = ["rating,x,group"] + [f"{y},{x!r},{g}" for y, x, g in zip(data.y, data.X[:, 0].tolist(), group)]
    (out / "data.csv").write_text("\n".join(rows) + "\n")
    spec = {"columns": [
        {"name": "rating", "role": "response", "levels": [1, 2, 3, 4, 5]},
        {"name": "x", "role": "continuous"},
        {"name": "group", "role": "binary", "levels": ["control", "treated"]},
    ]}
    (out / "spec.json").write_text(json.dumps(spec, indent=2) + "\n")
    print(f"wrote {out / 'data.csv'} and {out / 'spec.json'}")


if __name__ == "__main__":
    main()
