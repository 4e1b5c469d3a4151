"""Accuracy grid on hypercube data, for both high-dimensional regimes.

Thin wrapper over ``dualgbc sweep`` that runs the few-samples grid (many
features) and the many-samples grid, then prints mean accuracy per cell::

    python scripts/hypercube_sweep.py --out results/sweep --seeds 0..4
"""

import argparse
import csv
from collections import defaultdict
from pathlib import Path

from dualgbc.cli import main as cli

GRIDS = {
    "few_samples": dict(nf="100,1000,10000", ns="100", archs="gbc,dgbc,deep_dgbc"),
    "many_samples": dict(nf="100", ns="100,1000,10000", archs="dgbc,deep_dgbc"),
}


def summarize(path):
    acc = defaultdict(list)
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            if row["accuracy"] != "failed":
                acc[row["nf"], row["ns"], row["arch"]].append(float(row["accuracy"]))
    for (nf, ns, arch), vals in sorted(acc.items()):
        print(f"nf={nf:>6} ns={ns:>6} {arch:<10} mean accuracy {sum(vals) / len(vals):.3f}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results/sweep")
    ap.add_argument("--seeds", default="0..9")
    ap.add_argument("--grid", choices=sorted(GRIDS), action="append")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    status = 0
    for name in args.grid or sorted(GRIDS):
        g = GRIDS[name]
        path = out / f"{name}.csv"
        status |= cli(["sweep", "--nf-list", g["nf"], "--ns-list", g["ns"], "--archs", g["archs"],
                       "--seeds", args.seeds, "--out", str(path)])
        summarize(path)
    raise SystemExit(status)


if __name__ == "__main__":
    main()
