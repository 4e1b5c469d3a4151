"""Synthetic datasets (spiral, moons, circles, hypercube clusters) and CSV I/O."""

from __future__ import annotations

import csv
import hashlib
import io
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .numerics import as_matrix, make_rng


@dataclass(frozen=True)
class Dataset:
    """Sample matrix ``X`` (n x d) with optional integer class labels."""

    X: np.ndarray
    labels: np.ndarray | None = None
    name: str = "data"
    seed: int | None = None
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        X = as_matrix(self.X, "X")
        if not np.all(np.isfinite(X)):
            raise ValueError("dataset contains non-finite values")
        object.__setattr__(self, "X", X)
        if self.labels is not None:
            labels = np.asarray(self.labels, dtype=np.int64)
            if labels.shape != (X.shape[0],):
                raise ValueError(f"labels shape {labels.shape} does not match {X.shape[0]} samples")
            if labels.size and labels.min() < 0:
                raise ValueError("labels must be non-negative class ids")
            object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    @property
    def n_classes(self) -> int:
        return 0 if self.labels is None else int(self.labels.max()) + 1

    def fingerprint(self) -> str:
        """SHA-256 of the CSV serialization."""
        return hashlib.sha256(to_csv_string(self).encode("utf-8")).hexdigest()


def gen_spiral(n: int = 500, noise_sd: float = 0.02, rng=None, seed: int = 0) -> Dataset:
    """Archimedean spiral: ``theta ~ U[0, 4 pi]``, radius ``theta / 4 pi``."""
    if n < 1:
        raise ValueError("spiral needs n >= 1")
    if noise_sd < 0:
        raise ValueError("noise_sd must be non-negative")
    rng = make_rng(seed) if rng is None else rng
    theta = rng.uniform(0.0, 4.0 * np.pi, size=n)
    r = theta / (4.0 * np.pi)
    X = np.column_stack([r * np.cos(theta), r * np.sin(theta)])
    X = X + noise_sd * rng.standard_normal(X.shape)
    return Dataset(X, np.zeros(n, dtype=np.int64), "spiral", seed, {"theta": theta})


def gen_moons(n: int = 500, noise_sd: float = 0.05, rng=None, seed: int = 0) -> Dataset:
    """Two interleaved half circles; the upper one gets ``ceil(n/2)`` points."""
    if n < 2:
        raise ValueError("moons needs n >= 2")
    if noise_sd < 0:
        raise ValueError("noise_sd must be non-negative")
    rng = make_rng(seed) if rng is None else rng
    n_up = math.ceil(n / 2)
    n_low = n - n_up
    t_up = np.linspace(0.0, np.pi, n_up)
    t_low = np.linspace(0.0, np.pi, n_low)
    upper = np.column_stack([np.cos(t_up), np.sin(t_up)])
    lower = np.column_stack([1.0 - np.cos(t_low), 0.5 - np.sin(t_low)])
    X = np.vstack([upper, lower])
    X = X + noise_sd * rng.standard_normal(X.shape)
    labels = np.concatenate([np.zeros(n_up, np.int64), np.ones(n_low, np.int64)])
    return Dataset(X, labels, "moons", seed)


def gen_circles(
    n: int = 500, factor: float = 0.5, noise_sd: float = 0.05, rng=None, seed: int = 0
) -> Dataset:
    """Outer unit circle (label 0) and inner circle of radius ``factor`` (label 1)."""
    if not 0.0 < factor < 1.0:
        raise ValueError(f"factor must lie in (0, 1), got {factor}")
    if n < 2:
        raise ValueError("circles needs n >= 2")
    if noise_sd < 0:
        raise ValueError("noise_sd must be non-negative")
    rng = make_rng(seed) if rng is None else rng
    n_out = math.ceil(n / 2)
    n_in = n - n_out
    a_out = np.linspace(0.0, 2.0 * np.pi, n_out, endpoint=False)
    a_in = np.linspace(0.0, 2.0 * np.pi, n_in, endpoint=False)
    outer = np.column_stack([np.cos(a_out), np.sin(a_out)])
    inner = factor * np.column_stack([np.cos(a_in), np.sin(a_in)])
    X = np.vstack([outer, inner])
    X = X + noise_sd * rng.standard_normal(X.shape)
    labels = np.concatenate([np.zeros(n_out, np.int64), np.ones(n_in, np.int64)])
    return Dataset(X, labels, "circles", seed)


def gen_hypercube_clusters(
    n_s: int = 100,
    n_f: int = 1000,
    clusters_per_class: int = 1,
    class_sep: float = 1.0,
    rng=None,
    seed: int = 0,
) -> Dataset:
    """Gaussian clusters around random vertices of ``{-class_sep, +class_sep}^n_f``.

    ``2 * clusters_per_class`` distinct vertices are drawn; cluster ``c`` belongs
    to class ``c % 2``. Samples are split as evenly as possible over the
    clusters (earlier clusters take the remainder) and each sample is its
    vertex plus standard normal noise.
    """
    n_clusters = 2 * clusters_per_class
    if clusters_per_class < 1:
        raise ValueError("clusters_per_class must be >= 1")
    if n_f < 1:
        raise ValueError("n_f must be >= 1")
    if n_s < n_clusters:
        raise ValueError(f"need at least {n_clusters} samples for {n_clusters} clusters")
    if n_f < 63 and 2**n_f < n_clusters:
        raise ValueError(f"a {n_f}-cube has only {2**n_f} vertices, {n_clusters} requested")
    rng = make_rng(seed) if rng is None else rng

    signs: list[np.ndarray] = []
    seen: set[bytes] = set()
    while len(signs) < n_clusters:
        v = rng.integers(0, 2, size=n_f, dtype=np.int8)
        key = v.tobytes()
        if key not in seen:
            seen.add(key)
            signs.append(v)
    centers = class_sep * (2.0 * np.array(signs, dtype=np.float64) - 1.0)

    sizes = np.full(n_clusters, n_s // n_clusters)
    sizes[: n_s % n_clusters] += 1
    cluster_of = np.repeat(np.arange(n_clusters), sizes)
    X = centers[cluster_of] + rng.standard_normal((n_s, n_f))
    labels = (cluster_of % 2).astype(np.int64)
    return Dataset(
        X, labels, "hypercube", seed, {"centers": centers, "cluster_of": cluster_of}
    )


GENERATORS = {
    "spiral": gen_spiral,
    "moons": gen_moons,
    "circles": gen_circles,
    "hypercube": gen_hypercube_clusters,
}


def standardize(ds: Dataset) -> Dataset:
    """Per-feature z-scores with population (1/n) standard deviation.

    Constant columns become zeros.
    """
    if ds.n < 2:
        raise ValueError("standardization needs at least 2 samples")
    X = ds.X
    mean = X.mean(axis=0)
    centered = X - mean
    sd = np.sqrt(np.mean(centered * centered, axis=0))
    constant = sd <= 1e-12 * np.maximum(1.0, np.abs(mean))
    safe = np.where(constant, 1.0, sd)
    Z = centered / safe
    Z[:, constant] = 0.0
    return replace(ds, X=Z)


def to_csv_string(ds: Dataset) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([f"f{j}" for j in range(ds.d)] + ["label"])
    labels = ds.labels if ds.labels is not None else np.full(ds.n, -1)
    for row, lab in zip(ds.X.tolist(), labels.tolist()):
        writer.writerow([repr(v) for v in row] + [str(lab)])
    return buf.getvalue()


def save_csv(ds: Dataset, path) -> None:
    Path(path).write_text(to_csv_string(ds), encoding="utf-8", newline="\n")


def load_csv(path, name: str | None = None) -> Dataset:
    path = Path(path)
    with path.open(encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if not header or header[-1] != "label":
            raise ValueError(f"{path}: expected header f0,...,label")
        d = len(header) - 1
        rows, labels = [], []
        for lineno, rec in enumerate(reader, start=2):
            if not rec:
                continue
            if len(rec) != d + 1:
                raise ValueError(f"{path}:{lineno}: expected {d + 1} fields, got {len(rec)}")
            rows.append([float(v) for v in rec[:d]])
            labels.append(int(rec[d]))
    X = np.array(rows, dtype=np.float64).reshape(len(rows), d)
    lab = np.array(labels, dtype=np.int64)
    if lab.size and np.all(lab == -1):
        lab_out = None
    elif np.any(lab < 0):
        raise ValueError(f"{path}: mix of missing (-1) and present labels")
    else:
        lab_out = lab
    return Dataset(X, lab_out, name or path.stem)
