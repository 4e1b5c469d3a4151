"""Dense matrix helpers, seeded randomness and gradient oracles.

Matrices are plain ``float64`` numpy arrays. Randomness always comes from a
``numpy.random.Generator`` backed by PCG64, created through :func:`make_rng`;
nothing in the package touches numpy's global random state.
"""

from __future__ import annotations

from typing import Callable

import numpy as np


def make_rng(seed: int) -> np.random.Generator:
    """Return a PCG64 generator. Same seed, same stream on every platform."""
    return np.random.Generator(np.random.PCG64(int(seed)))


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    m = np.asarray(a, dtype=np.float64)
    if m.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {m.shape}")
    return m


def pairwise_sq_distances(A, B) -> np.ndarray:
    """Squared Euclidean distances between the rows of ``A`` (n x d) and ``B`` (k x d).

    Uses explicit differences rather than the ``|a|^2 - 2ab + |b|^2`` expansion,
    so entries are exactly zero for identical rows and never negative.
    """
    A = as_matrix(A, "A")
    B = as_matrix(B, "B")
    if A.shape[1] != B.shape[1]:
        raise ValueError(
            f"dimension mismatch: A has {A.shape[1]} columns, B has {B.shape[1]}"
        )
    n, k = A.shape[0], B.shape[0]
    out = np.empty((n, k))
    # Loop over the shorter axis to keep the temporary at (n or k) x d.
    if k <= n:
        for j in range(k):
            diff = A - B[j]
            out[:, j] = np.einsum("ij,ij->i", diff, diff)
    else:
        for i in range(n):
            diff = B - A[i]
            out[i, :] = np.einsum("ij,ij->i", diff, diff)
    return out


def frobenius_norm(M) -> float:
    M = np.asarray(M, dtype=np.float64)
    return float(np.sqrt(np.sum(M * M)))


def finite_difference_gradient(
    f: Callable[[np.ndarray], float], M, h: float = 1e-5
) -> np.ndarray:
    """Central-difference gradient of the scalar function ``f`` at ``M``.

    Parameters
    ----------
    f : callable
        Maps a matrix shaped like ``M`` to a real number.
    M : array_like
        Point of evaluation. Not modified.
    h : float
        Step size, must be positive.

    Returns
    -------
    numpy.ndarray
        Matrix of ``(f(M + h e_ij) - f(M - h e_ij)) / 2h``.
    """
    if not h > 0:
        raise ValueError(f"step h must be positive, got {h}")
    M = np.array(M, dtype=np.float64)
    grad = np.empty_like(M)
    for idx in np.ndindex(M.shape):
        orig = M[idx]
        M[idx] = orig + h
        fp = float(f(M))
        M[idx] = orig - h
        fm = float(f(M))
        M[idx] = orig
        if not (np.isfinite(fp) and np.isfinite(fm)):
            raise FloatingPointError(f"non-finite function value when perturbing entry {idx}")
        grad[idx] = (fp - fm) / (2.0 * h)
    return grad


def orthonormalize_columns(M, rng: np.random.Generator | None = None, tol: float = 1e-10) -> np.ndarray:
    """Modified Gram-Schmidt on the columns of ``M``.

    Each output column has its first nonzero entry positive. A column that is
    (numerically) dependent on the previous ones is replaced by a fresh
    Gaussian draw from ``rng``, so the result always has ``d`` orthonormal
    columns; without ``rng`` a rank-deficient input raises.
    """
    Q = np.array(as_matrix(M), dtype=np.float64)
    n, d = Q.shape
    if d > n:
        raise ValueError(f"cannot orthonormalize {d} columns in dimension {n}")
    scale = max(1.0, float(np.max(np.abs(Q)))) if Q.size else 1.0
    for j in range(d):
        for _attempt in range(100):
            v = Q[:, j].copy()
            # two passes of MGS for numerical orthogonality to 1e-10 and beyond
            for _ in range(2):
                for i in range(j):
                    v -= (Q[:, i] @ v) * Q[:, i]
            norm = np.linalg.norm(v)
            if norm > tol * scale:
                break
            if rng is None:
                raise np.linalg.LinAlgError(f"column {j} is linearly dependent on earlier columns")
            Q[:, j] = rng.standard_normal(n)
        else:  # pragma: no cover - 100 consecutive degenerate Gaussian draws
            raise np.linalg.LinAlgError("could not draw an independent column")
        v /= norm
        nz = np.flatnonzero(np.abs(v) > 1e-15)
        if nz.size and v[nz[0]] < 0:
            v = -v
        Q[:, j] = v
    return Q


def check_finite(name: str, value) -> None:
    if not np.all(np.isfinite(value)):
        raise FloatingPointError(f"{name} contains non-finite values")
