"""Lloyd's k-means, used as a reference quantization error."""

import numpy as np

from .numerics import make_rng


def lloyd_kmeans(X, k: int, seed: int, iters: int = 100) -> tuple[np.ndarray, float]:
    """Plain Lloyd iterations from ``k`` distinct random samples.

    Empty clusters keep their previous center. Returns the centers and the
    final mean squared distance to the nearest center.
    """
    X = np.asarray(X, dtype=np.float64)
    rng = make_rng(seed)
    C = X[rng.choice(len(X), size=k, replace=False)].copy()
    for _ in range(iters):
        D = ((X[:, None, :] - C[None, :, :]) ** 2).sum(axis=2)
        a = D.argmin(axis=1)
        for j in range(k):
            members = X[a == j]
            if len(members):
                C[j] = members.mean(axis=0)
    D = ((X[:, None, :] - C[None, :, :]) ** 2).sum(axis=2)
    return C, float(D.min(axis=1).mean())
