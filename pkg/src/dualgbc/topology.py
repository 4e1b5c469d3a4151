"""Competitive Hebbian edges, quantization error and the topological loss.

The loss on prototypes ``P`` (k x d) is::

    L = Q + lam * ||E||_F
    Q = mean_i min_j ||x_i - p_j||^2
    E[i, j] = ||p_i - p_j||  where the CHL mask connects i and j, else 0

Edge masks are symmetric ``k x k`` uint8 arrays with zero diagonal. All
argmin-type choices break ties toward the lowest prototype index.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numerics import as_matrix, frobenius_norm, pairwise_sq_distances


@dataclass
class PrototypeSet:
    P: np.ndarray
    mask: np.ndarray

    def __post_init__(self):
        self.P = as_matrix(self.P, "P")
        self.mask = np.asarray(self.mask, dtype=np.uint8)
        k = self.P.shape[0]
        if self.mask.shape != (k, k):
            raise ValueError(f"mask shape {self.mask.shape} does not match {k} prototypes")

    @property
    def k(self) -> int:
        return self.P.shape[0]

    def edges(self) -> list[tuple[int, int]]:
        i, j = np.nonzero(np.triu(self.mask, 1))
        return list(zip(i.tolist(), j.tolist()))


def two_winners(D: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """First and second winner per row of a distance matrix (stable ties)."""
    order = np.argsort(D, axis=1, kind="stable")
    return order[:, 0], order[:, 1]


def chl_edges(X, P) -> np.ndarray:
    """Connect the two nearest prototypes of every sample."""
    P = as_matrix(P, "P")
    k = P.shape[0]
    if k < 2:
        raise ValueError("CHL needs at least 2 prototypes")
    D = pairwise_sq_distances(X, P)
    first, second = two_winners(D)
    return mask_from_pairs(k, first, second)


def mask_from_pairs(k: int, a, b) -> np.ndarray:
    mask = np.zeros((k, k), dtype=np.uint8)
    mask[a, b] = 1
    mask[b, a] = 1
    np.fill_diagonal(mask, 0)
    return mask


def edge_matrix(P, mask) -> np.ndarray:
    """Distance-weighted adjacency: ``E[i, j] = ||p_i - p_j||`` on masked pairs."""
    P = as_matrix(P, "P")
    mask = np.asarray(mask)
    k = P.shape[0]
    if mask.shape != (k, k):
        raise ValueError(f"mask shape {mask.shape} does not match {k} prototypes")
    dist = np.sqrt(pairwise_sq_distances(P, P))
    E = np.where(mask != 0, dist, 0.0)
    np.fill_diagonal(E, 0.0)
    return E


def voronoi_assign(X, P) -> np.ndarray:
    """Index of the nearest prototype for every sample."""
    return np.argmin(pairwise_sq_distances(X, P), axis=1)


def quantization_error(X, P, assign=None) -> float:
    """Mean squared distance from each sample to its nearest prototype.

    If ``assign`` is given it is used instead of the nearest prototype, which
    is how the loss is evaluated with a frozen Voronoi partition.
    """
    X = as_matrix(X, "X")
    P = as_matrix(P, "P")
    if assign is None:
        D = pairwise_sq_distances(X, P)
        return float(np.mean(np.min(D, axis=1)))
    diff = X - P[assign]
    return float(np.mean(np.sum(diff * diff, axis=1)))


def edge_norm(P, mask) -> float:
    return frobenius_norm(edge_matrix(P, mask))


def loss(X, P, mask, lam: float, assign=None) -> float:
    if lam < 0:
        raise ValueError(f"lambda must be non-negative, got {lam}")
    q = quantization_error(X, P, assign)
    if lam == 0:
        return q
    return q + lam * edge_norm(P, mask)


def loss_gradient(X, P, mask, lam: float, assign=None) -> np.ndarray:
    """Gradient of :func:`loss` w.r.t. ``P`` with mask and assignment held fixed.

    Quantization part, row ``i``: ``(2/n) sum_{x in V_i} (p_i - x)``.
    Edge part, row ``i``: ``(2 / ||E||_F) sum_{j ~ i} (p_i - p_j)``, taken as
    zero when ``||E||_F = 0``. Pairs of connected prototypes that coincide add
    nothing to either side, so that singularity needs no special treatment.
    """
    if lam < 0:
        raise ValueError(f"lambda must be non-negative, got {lam}")
    X = as_matrix(X, "X")
    P = as_matrix(P, "P")
    n, d = X.shape
    k = P.shape[0]
    if P.shape[1] != d:
        raise ValueError(f"dimension mismatch: X has {d} features, P has {P.shape[1]}")
    if assign is None:
        assign = voronoi_assign(X, P)

    onehot = np.zeros((k, n))
    onehot[assign, np.arange(n)] = 1.0
    counts = onehot.sum(axis=1)
    sums = onehot @ X
    grad = (2.0 / n) * (counts[:, None] * P - sums)

    if lam > 0:
        norm = edge_norm(P, mask)
        if norm > 0:
            A = (np.asarray(mask) != 0).astype(np.float64)
            np.fill_diagonal(A, 0.0)
            degree = A.sum(axis=1)
            grad += lam * (2.0 / norm) * (degree[:, None] * P - A @ P)
    return grad
