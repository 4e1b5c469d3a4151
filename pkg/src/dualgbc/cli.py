"""Command line: ``dualgbc {gen,train,eval,plot,sweep}``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
import tempfile
import time
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import datasets
from .evaluation import cluster_accuracy, format_report, prune, report
from .layers import load_model, save_model
from .numerics import make_rng
from .svg import render
from .topology import PrototypeSet, chl_edges
from .training import DEFAULT_LR, GBC_INITS, KINDS, OPTIMIZERS, TrainConfig, multi_seed_run, train

log = logging.getLogger("dualgbc")


class CliError(Exception):
    pass


def parse_seeds(text: str) -> list[int]:
    """``"0..9"`` (inclusive), ``"1,4,7"`` or a mix such as ``"0..2,10"``."""
    seeds: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if ".." in part:
            lo, hi = part.split("..", 1)
            lo_i, hi_i = int(lo), int(hi)
            if hi_i < lo_i:
                raise argparse.ArgumentTypeError(f"empty seed range {part!r}")
            seeds.extend(range(lo_i, hi_i + 1))
        else:
            seeds.append(int(part))
    if not seeds:
        raise argparse.ArgumentTypeError("no seeds given")
    return seeds


def parse_ints(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    os.replace(tmp, path)


def load_data(path, standardize: bool) -> datasets.Dataset:
    try:
        ds = datasets.load_csv(path)
    except OSError as exc:
        raise CliError(f"cannot read dataset {path}: {exc}") from exc
    return datasets.standardize(ds) if standardize else ds


def prototypes_for(model, X) -> PrototypeSet:
    try:
        P, _ = model.forward(X)
    except ValueError as exc:
        raise CliError(f"model does not fit the data: {exc}") from exc
    if P.shape[1] != X.shape[1]:
        raise CliError(f"model prototypes have {P.shape[1]} features, data has {X.shape[1]}")
    return PrototypeSet(P, chl_edges(X, P))


# -- commands -----------------------------------------------------------------

def cmd_gen(args) -> int:
    rng = make_rng(args.seed)
    name = args.dataset
    if name == "spiral":
        ds = datasets.gen_spiral(args.n, args.noise if args.noise is not None else 0.02, rng, args.seed)
    elif name == "moons":
        ds = datasets.gen_moons(args.n, args.noise if args.noise is not None else 0.05, rng, args.seed)
    elif name == "circles":
        ds = datasets.gen_circles(
            args.n, args.factor, args.noise if args.noise is not None else 0.05, rng, args.seed
        )
    else:
        ds = datasets.gen_hypercube_clusters(
            args.ns, args.nf, args.clusters_per_class, args.class_sep, rng, args.seed
        )
    out = Path(args.out or f"{name}.csv")
    datasets.save_csv(ds, out)
    print(f"{name}: {ds.n} samples x {ds.d} features, {ds.n_classes} classes -> {out}")
    return 0


def cmd_train(args) -> int:
    ds = load_data(args.data, not args.no_standardize)
    cfg = TrainConfig(
        arch=args.arch, k=args.k, epochs=args.epochs, lr=args.lr, lam=args.lam,
        hidden_sizes=tuple(args.hidden), optimizer=args.optimizer, gbc_init=args.gbc_init,
    )
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    runs_meta, failures = [], []
    for seed in args.seeds:
        t0 = time.perf_counter()
        (run,) = multi_seed_run(cfg, [seed], ds)
        elapsed = time.perf_counter() - t0
        entry = {"seed": seed, "wall_clock_s": elapsed}
        if run.ok:
            model_path = out_dir / f"model_seed{seed}.json"
            trace_path = out_dir / f"trace_seed{seed}.csv"
            save_model(run.result.model, model_path, d=ds.d)
            run.result.trace.save_csv(trace_path)
            final = run.result.trace.records[-1]
            entry.update(model=str(model_path), trace=str(trace_path), status="ok")
            print(
                f"seed {seed}: Q={final.quantization_error:.6g} "
                f"edge_norm={final.edge_norm:.6g} valid={final.valid_prototypes} ({elapsed:.1f}s)"
            )
        else:
            entry.update(status="failed", error=str(run.error))
            failures.append(seed)
            print(f"seed {seed}: FAILED: {run.error}", file=sys.stderr)
        runs_meta.append(entry)
    manifest = {
        "config": {**asdict(cfg), "learning_rate": cfg.learning_rate},
        "standardized": not args.no_standardize,
        "data": str(args.data),
        "dataset_sha256": ds.fingerprint(),
        "seeds": list(args.seeds),
        "runs": runs_meta,
    }
    write_atomic(out_dir / "manifest.json", json.dumps(manifest, indent=2) + "\n")
    if failures:
        print(f"{len(failures)} of {len(args.seeds)} runs failed: seeds {failures}", file=sys.stderr)
        return 1
    return 0


def cmd_eval(args) -> int:
    ds = load_data(args.data, not args.no_standardize)
    model = load_model(args.model)
    ps = prototypes_for(model, ds.X)
    sys.stdout.write(format_report(report(ds.X, ps, ds.labels)))
    return 0


def cmd_plot(args) -> int:
    ds = load_data(args.data, not args.no_standardize)
    if ds.d != 2:
        raise CliError(
            f"plot needs 2-D data, got {ds.d} features; use the trace CSV from `train` instead"
        )
    model = load_model(args.model)
    ps = prototypes_for(model, ds.X)
    res = prune(ds.X, ps)
    svg = render(ds.X, ps.P, ps.edges(), ds.labels, res.kept, title=Path(args.data).stem)
    Path(args.out).write_text(svg, encoding="utf-8", newline="\n")
    print(f"wrote {args.out}: {ds.n} samples, {res.kept.size} prototypes, {len(ps.edges())} edges")
    return 0


def cmd_sweep(args) -> int:
    rows, failed = [], 0
    for nf in args.nf_list:
        for ns in args.ns_list:
            k = max(2, ns // 10)
            ds = datasets.standardize(
                datasets.gen_hypercube_clusters(ns, nf, seed=args.data_seed)
            )
            for arch in args.archs:
                for seed in args.seeds:
                    t0 = time.perf_counter()
                    try:
                        cfg = TrainConfig(
                            arch=arch, k=k, epochs=args.epochs, lam=args.lam, seed=seed,
                            hidden_sizes=tuple(args.hidden), optimizer=args.optimizer,
                            gbc_init=args.gbc_init,
                        )
                        res = train(cfg, ds)
                        acc = repr(cluster_accuracy(prune(ds.X, res.prototypes), ds.labels))
                    except (ValueError, FloatingPointError) as exc:
                        failed += 1
                        acc = "failed"
                        print(f"nf={nf} ns={ns} {arch} seed={seed}: FAILED: {exc}", file=sys.stderr)
                    elapsed = time.perf_counter() - t0
                    rows.append([nf, ns, arch, seed, acc, f"{elapsed:.3f}"])
                    print(f"nf={nf} ns={ns} k={k} {arch} seed={seed}: accuracy={acc}")
    out = Path(args.out)
    with out.open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["nf", "ns", "arch", "seed", "accuracy", "runtime_s"])
        w.writerows(rows)
    return 1 if failed else 0


# -- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dualgbc", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a synthetic dataset CSV")
    g.add_argument("dataset", choices=sorted(datasets.GENERATORS))
    g.add_argument("--n", type=int, default=500, help="samples (spiral, moons, circles)")
    g.add_argument("--noise", type=float, default=None, help="Gaussian noise sd")
    g.add_argument("--factor", type=float, default=0.5, help="inner circle radius")
    g.add_argument("--ns", type=int, default=100, help="hypercube samples")
    g.add_argument("--nf", type=int, default=1000, help="hypercube features")
    g.add_argument("--clusters-per-class", type=int, default=1)
    g.add_argument("--class-sep", type=float, default=1.0)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out")
    g.set_defaults(func=cmd_gen)

    def model_opts(sp):
        sp.add_argument("--hidden", type=parse_ints, default=[10, 10],
                        help="deep_dgbc hidden sizes, e.g. 10,10")
        sp.add_argument("--optimizer", choices=OPTIMIZERS, default="adam")
        sp.add_argument("--gbc-init", choices=GBC_INITS, default="samples")
        sp.add_argument("--lambda", dest="lam", type=float, default=0.01)
        sp.add_argument("--epochs", type=int, default=400)

    t = sub.add_parser("train", help="train one model per seed")
    t.add_argument("--data", required=True)
    t.add_argument("--arch", choices=KINDS, default="dgbc")
    t.add_argument("--k", type=int, default=30)
    t.add_argument("--lr", type=float, default=None,
                   help="learning rate (default: " + ", ".join(f"{a} {v}" for a, v in DEFAULT_LR.items()) + ")")
    t.add_argument("--seeds", type=parse_seeds, default=[0], help="e.g. 0..9 or 1,2,3")
    t.add_argument("--out-dir", default="runs")
    t.add_argument("--no-standardize", action="store_true")
    model_opts(t)
    t.set_defaults(func=cmd_train)

    for name, func, helptext in (("eval", cmd_eval, "print an evaluation report"),
                                 ("plot", cmd_plot, "render a 2-D solution as SVG")):
        e = sub.add_parser(name, help=helptext)
        e.add_argument("--data", required=True)
        e.add_argument("--model", required=True)
        e.add_argument("--no-standardize", action="store_true")
        if name == "plot":
            e.add_argument("--out", required=True)
        e.set_defaults(func=func)

    s = sub.add_parser("sweep", help="hypercube accuracy over feature/sample counts")
    s.add_argument("--nf-list", type=parse_ints, default=[1000])
    s.add_argument("--ns-list", type=parse_ints, default=[100])
    s.add_argument("--archs", type=lambda v: [a for a in v.split(",") if a],
                   default=list(KINDS))
    s.add_argument("--seeds", type=parse_seeds, default=[0], help="initialization seeds")
    s.add_argument("--data-seed", type=int, default=0, help="seed of the generated dataset")
    s.add_argument("--out", default="sweep.csv")
    model_opts(s)
    s.set_defaults(func=cmd_sweep)
    return p


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    if getattr(args, "archs", None):
        bad = [a for a in args.archs if a not in KINDS]
        if bad:
            print(f"error: unknown architecture(s) {bad}", file=sys.stderr)
            return 2
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, FloatingPointError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
