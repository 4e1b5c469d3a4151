"""Full-batch training with per-epoch CHL recomputation.

One epoch is one optimizer step on the whole dataset. Two optimizers are
available: ``adam`` (default) and plain gradient descent ``gd``; the latter is
the one under which base and dual layers provably follow the same prototype
trajectory on orthonormal data.
"""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .datasets import Dataset
from .layers import KINDS, init_model
from .numerics import make_rng, pairwise_sq_distances
from .topology import PrototypeSet, edge_norm, loss_gradient, mask_from_pairs, two_winners

log = logging.getLogger(__name__)

DEFAULT_LR = {"gbc": 0.008, "dgbc": 0.0008, "deep_dgbc": 0.0008}
OPTIMIZERS = ("adam", "gd")
GBC_INITS = ("samples", "gaussian")


class GradientDescent:
    def __init__(self, params, lr: float):
        self.params = params
        self.lr = lr

    def step(self, grads) -> None:
        for W, g in zip(self.params, grads):
            W -= self.lr * g


class Adam:
    """Adam with the usual defaults (beta1=0.9, beta2=0.999, eps=1e-7)."""

    def __init__(self, params, lr: float, beta1=0.9, beta2=0.999, eps=1e-7):
        self.params = params
        self.lr = lr
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.m = [np.zeros_like(W) for W in params]
        self.v = [np.zeros_like(W) for W in params]
        self.t = 0

    def step(self, grads) -> None:
        self.t += 1
        c1 = 1.0 - self.beta1**self.t
        c2 = 1.0 - self.beta2**self.t
        for W, g, m, v in zip(self.params, grads, self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            W -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


def make_optimizer(name: str, params, lr: float):
    if name == "gd":
        return GradientDescent(params, lr)
    if name == "adam":
        return Adam(params, lr)
    raise ValueError(f"unknown optimizer {name!r}; expected one of {OPTIMIZERS}")


@dataclass(frozen=True)
class TrainConfig:
    arch: str = "dgbc"
    k: int = 30
    epochs: int = 400
    lr: float | None = None  # None -> DEFAULT_LR[arch]
    lam: float = 0.01
    seed: int = 0
    hidden_sizes: tuple[int, ...] = (10, 10)
    optimizer: str = "adam"
    gbc_init: str = "samples"

    def __post_init__(self):
        if self.gbc_init not in GBC_INITS:
            raise ValueError(f"unknown gbc_init {self.gbc_init!r}; expected one of {GBC_INITS}")
        if self.optimizer not in OPTIMIZERS:
            raise ValueError(f"unknown optimizer {self.optimizer!r}; expected one of {OPTIMIZERS}")
        if self.arch not in KINDS:
            raise ValueError(f"unknown architecture {self.arch!r}; expected one of {KINDS}")
        if self.k < 2:
            raise ValueError("k must be >= 2")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.lr is not None and self.lr < 0:
            raise ValueError("learning rate must be non-negative")
        if self.lam < 0:
            raise ValueError("lambda must be non-negative")

    @property
    def learning_rate(self) -> float:
        return DEFAULT_LR[self.arch] if self.lr is None else self.lr


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    quantization_error: float
    edge_norm: float
    valid_prototypes: int


@dataclass
class MetricsTrace:
    records: list[EpochRecord] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.records)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records])

    def to_csv_string(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["epoch", "quantization_error", "edge_norm", "valid_prototypes"])
        for r in self.records:
            w.writerow([r.epoch, repr(r.quantization_error), repr(r.edge_norm), r.valid_prototypes])
        return buf.getvalue()

    def save_csv(self, path) -> None:
        Path(path).write_text(self.to_csv_string(), encoding="utf-8", newline="\n")

    @classmethod
    def load_csv(cls, path) -> "MetricsTrace":
        with Path(path).open(encoding="utf-8", newline="") as fh:
            rows = list(csv.DictReader(fh))
        return cls([
            EpochRecord(int(r["epoch"]), float(r["quantization_error"]),
                        float(r["edge_norm"]), int(r["valid_prototypes"]))
            for r in rows
        ])


class TrainingDiverged(FloatingPointError):
    def __init__(self, epoch: int, quantity: str):
        super().__init__(f"non-finite {quantity} at epoch {epoch}")
        self.epoch = epoch
        self.quantity = quantity


@dataclass
class TrainResult:
    model: object
    prototypes: PrototypeSet
    trace: MetricsTrace


def structure(X: np.ndarray, P: np.ndarray):
    """Voronoi assignment and CHL mask from one distance computation."""
    D = pairwise_sq_distances(X, P)
    first, second = two_winners(D)
    return first, mask_from_pairs(P.shape[0], first, second), D


def train(
    cfg: TrainConfig,
    ds: Dataset,
    model=None,
    callback: Callable[[int, np.ndarray], None] | None = None,
) -> TrainResult:
    """Train one model.

    Each epoch recomputes assignment and CHL mask from the current prototypes,
    records metrics, then takes one gradient step on the loss with that
    structure frozen. The first trace record therefore describes the
    initialization. ``callback(epoch, P)`` sees the prototypes the metrics of
    that epoch were computed on.

    Pass ``model`` to start from given weights; it is updated in place.
    """
    X = ds.X
    n, d = X.shape
    if model is None:
        init_X = X if cfg.gbc_init == "samples" else None
        model = init_model(cfg.arch, cfg.k, d, n, cfg.hidden_sizes, make_rng(cfg.seed), X=init_X)
    opt = make_optimizer(cfg.optimizer, model.params, cfg.learning_rate)
    trace = MetricsTrace()

    for epoch in range(cfg.epochs):
        P, cache = model.forward(X)
        if not np.all(np.isfinite(P)):
            raise TrainingDiverged(epoch, "prototypes")
        assign, mask, D = structure(X, P)
        q = float(np.mean(D[np.arange(n), assign]))
        en = edge_norm(P, mask)
        if not (np.isfinite(q) and np.isfinite(en)):
            raise TrainingDiverged(epoch, "loss")
        trace.records.append(EpochRecord(epoch, q, en, int(np.unique(assign).size)))
        if callback is not None:
            callback(epoch, P)

        G = loss_gradient(X, P, mask, cfg.lam, assign)
        grads = model.backward(X, cache, G)
        for g in grads:
            if not np.all(np.isfinite(g)):
                raise TrainingDiverged(epoch, "gradient")
        opt.step(grads)

    P, _ = model.forward(X)
    if not np.all(np.isfinite(P)):
        raise TrainingDiverged(cfg.epochs, "prototypes")
    _, mask, _ = structure(X, P)
    return TrainResult(model, PrototypeSet(P.copy(), mask), trace)


@dataclass
class SeedRun:
    seed: int
    result: TrainResult | None
    error: Exception | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


def multi_seed_run(cfg: TrainConfig, seeds: Sequence[int], ds: Dataset) -> list[SeedRun]:
    """Train once per seed. A failing seed is logged and kept as an error entry."""
    if len(seeds) < 1:
        raise ValueError("need at least one seed")
    runs = []
    for seed in seeds:
        try:
            res = train(replace(cfg, seed=int(seed)), ds)
            runs.append(SeedRun(int(seed), res))
        except (FloatingPointError, ValueError) as exc:
            log.warning("seed %s failed: %s", seed, exc)
            runs.append(SeedRun(int(seed), None, exc))
    return runs
