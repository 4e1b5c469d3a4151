"""Quantization error traces of GBC and DGBC on the 2-D benchmarks.

Writes one CSV per (dataset, arch) with the per-epoch mean and variance over
seeds, plus a summary table against Lloyd k-means. Usage::

    python scripts/convergence_2d.py --out results/convergence --seeds 0..9
"""

import argparse
from pathlib import Path

import numpy as np

from dualgbc.baselines import lloyd_kmeans
from dualgbc.cli import parse_seeds
from dualgbc.datasets import gen_circles, gen_moons, gen_spiral, standardize
from dualgbc.training import TrainConfig, multi_seed_run

DATASETS = {"spiral": gen_spiral, "moons": gen_moons, "circles": gen_circles}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results/convergence")
    ap.add_argument("--seeds", type=parse_seeds, default=list(range(10)))
    ap.add_argument("--k", type=int, default=30)
    ap.add_argument("--epochs", type=int, default=400)
    ap.add_argument("--optimizer", choices=("adam", "gd"), default="adam")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    summary = ["dataset,arch,q_at_100,q_final,q_final_var,kmeans_q,ratio"]
    for name, gen in DATASETS.items():
        ds = standardize(gen(500, seed=0))
        kmeans = float(np.mean([lloyd_kmeans(ds.X, args.k, s)[1] for s in args.seeds]))
        for arch in ("gbc", "dgbc"):
            cfg = TrainConfig(arch=arch, k=args.k, epochs=args.epochs, optimizer=args.optimizer)
            runs = [r for r in multi_seed_run(cfg, args.seeds, ds) if r.ok]
            Q = np.array([r.result.trace.column("quantization_error") for r in runs])
            rows = ["epoch,mean,var"] + [
                f"{e},{m!r},{v!r}" for e, (m, v) in enumerate(zip(Q.mean(0), Q.var(0)))
            ]
            (out / f"{name}_{arch}.csv").write_text("\n".join(rows) + "\n")
            at100 = Q[:, min(100, Q.shape[1] - 1)].mean()
            final = Q[:, -1]
            summary.append(
                f"{name},{arch},{at100:.5f},{final.mean():.5f},{final.var():.2e},"
                f"{kmeans:.5f},{final.mean() / kmeans:.3f}"
            )
            print(summary[-1])
    (out / "summary.csv").write_text("\n".join(summary) + "\n")


if __name__ == "__main__":
    main()
