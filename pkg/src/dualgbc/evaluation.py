"""Pruning, connected components and cluster accuracy of a trained prototype graph."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components as _cc

from .numerics import as_matrix
from .topology import PrototypeSet, voronoi_assign


@dataclass
class ClusteringResult:
    kept: np.ndarray  # sorted prototype indices that survived pruning
    component_of: np.ndarray  # component id per kept prototype, aligned with ``kept``
    sample_component: np.ndarray  # component id per sample

    @property
    def n_components(self) -> int:
        return int(self.component_of.max()) + 1 if self.component_of.size else 0


def valid_prototype_count(X, P) -> int:
    """Number of prototypes that win at least one sample."""
    return int(np.unique(voronoi_assign(X, P)).size)


def connected_components(mask, kept) -> np.ndarray:
    """Component id per kept prototype, numbered by smallest member index."""
    kept = np.asarray(kept, dtype=np.int64)
    mask = np.asarray(mask)
    if kept.size == 0:
        return np.zeros(0, dtype=np.int64)
    sub = (mask[np.ix_(kept, kept)] != 0).astype(np.int8)
    _, raw = _cc(csr_matrix(sub), directed=False)
    # scipy's numbering is not guaranteed; renumber by first appearance in kept order
    order = np.argsort(kept, kind="stable")
    remap: dict[int, int] = {}
    for i in order:
        remap.setdefault(int(raw[i]), len(remap))
    return np.array([remap[int(r)] for r in raw], dtype=np.int64)


def prune(X, ps: PrototypeSet) -> ClusteringResult:
    """Drop prototypes that have no CHL edge *and* an empty Voronoi set."""
    X = as_matrix(X, "X")
    winners = np.unique(voronoi_assign(X, ps.P))
    has_edge = np.asarray(ps.mask).sum(axis=1) > 0
    is_winner = np.zeros(ps.k, dtype=bool)
    is_winner[winners] = True
    kept = np.flatnonzero(has_edge | is_winner)
    assert kept.size > 0 or X.shape[0] == 0, "every non-empty dataset has a winner"
    comp = connected_components(ps.mask, kept)
    nearest = voronoi_assign(X, ps.P[kept])
    return ClusteringResult(kept, comp, comp[nearest])


def cluster_accuracy(result: ClusteringResult, labels) -> float:
    """Pooled majority accuracy: sum over components of the majority class count, over n."""
    if labels is None:
        raise ValueError("cluster accuracy needs class labels")
    labels = np.asarray(labels, dtype=np.int64)
    if labels.shape != result.sample_component.shape:
        raise ValueError("labels are not aligned with the samples")
    n = labels.size
    if n == 0:
        raise ValueError("no samples")
    table = np.zeros((result.n_components, int(labels.max()) + 1), dtype=np.int64)
    np.add.at(table, (result.sample_component, labels), 1)
    return float(table.max(axis=1).sum() / n)


def report(X, ps: PrototypeSet, labels=None) -> dict:
    res = prune(X, ps)
    out = {}
    if labels is not None:
        out["accuracy"] = cluster_accuracy(res, labels)
    out["components"] = res.n_components
    out["valid_prototypes"] = valid_prototype_count(X, ps.P)
    out["kept"] = int(res.kept.size)
    return out


def format_report(rep: dict) -> str:
    return "".join(f"{key}={value}\n" for key, value in rep.items())
