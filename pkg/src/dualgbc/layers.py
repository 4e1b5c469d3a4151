"""Prototype-producing layers.

Data is always ``X`` with shape (n samples, d features) and prototypes are
``P`` with shape (k, d).

* ``gbc``: the weight matrix ``W1`` (k x d) *is* the prototype matrix.
* ``dgbc``: a linear layer fed with the transposed data, ``P = W2 @ X``
  with ``W2`` of shape (k, n). Prototype column ``j`` only sees feature
  column ``j`` of ``X``.
* ``deep_dgbc``: tanh layers over ``X.T`` followed by a linear output layer,
  ``P = (tanh(...tanh(X.T @ V1)...) @ V_out).T``.

Every model exposes ``forward(X) -> (P, cache)`` and
``backward(X, cache, G) -> list of weight gradients`` where ``G`` is dL/dP.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .numerics import as_matrix

KINDS = ("gbc", "dgbc", "deep_dgbc")


@dataclass
class GbcModel:
    W1: np.ndarray
    kind = "gbc"

    @property
    def k(self) -> int:
        return self.W1.shape[0]

    @property
    def params(self) -> list[np.ndarray]:
        return [self.W1]

    def forward(self, X):
        return gbc_prototypes(self), None

    def backward(self, X, cache, G):
        return [np.array(G, dtype=np.float64)]


@dataclass
class DgbcModel:
    W2: np.ndarray
    kind = "dgbc"

    @property
    def k(self) -> int:
        return self.W2.shape[0]

    @property
    def params(self) -> list[np.ndarray]:
        return [self.W2]

    def forward(self, X):
        return dgbc_forward(self, X), None

    def backward(self, X, cache, G):
        return [dgbc_backward(self, X, G)]


@dataclass
class DeepDgbcModel:
    hidden: list[np.ndarray]
    V_out: np.ndarray
    kind = "deep_dgbc"

    @property
    def k(self) -> int:
        return self.V_out.shape[1]

    @property
    def hidden_sizes(self) -> list[int]:
        return [V.shape[1] for V in self.hidden]

    @property
    def params(self) -> list[np.ndarray]:
        return [*self.hidden, self.V_out]

    def forward(self, X):
        return deep_forward(self, X)

    def backward(self, X, cache, G):
        return deep_backward(self, cache, G)


def gbc_prototypes(m: GbcModel) -> np.ndarray:
    return m.W1


def dgbc_forward(m: DgbcModel, X) -> np.ndarray:
    X = as_matrix(X, "X")
    if m.W2.shape[1] != X.shape[0]:
        raise ValueError(
            f"W2 expects {m.W2.shape[1]} samples, data has {X.shape[0]}"
        )
    return m.W2 @ X


def dgbc_backward(m: DgbcModel, X, G) -> np.ndarray:
    """dL/dW2 = G @ X.T."""
    X = as_matrix(X, "X")
    G = as_matrix(G, "G")
    if G.shape != (m.W2.shape[0], X.shape[1]) or m.W2.shape[1] != X.shape[0]:
        raise ValueError(
            f"shape mismatch: W2 {m.W2.shape}, X {X.shape}, G {G.shape}"
        )
    return G @ X.T


@dataclass
class DeepCache:
    activations: list[np.ndarray] = field(default_factory=list)


def deep_forward(m: DeepDgbcModel, X) -> tuple[np.ndarray, DeepCache]:
    X = as_matrix(X, "X")
    H = X.T
    cache = DeepCache([H])
    for layer, V in enumerate(m.hidden):
        if V.shape[0] != H.shape[1]:
            raise ValueError(
                f"hidden layer {layer} expects {V.shape[0]} inputs, got {H.shape[1]}"
            )
        H = np.tanh(H @ V)
        cache.activations.append(H)
    if m.V_out.shape[0] != H.shape[1]:
        raise ValueError(f"output layer expects {m.V_out.shape[0]} inputs, got {H.shape[1]}")
    return (H @ m.V_out).T, cache


def deep_backward(m: DeepDgbcModel, cache: DeepCache, G) -> list[np.ndarray]:
    """Reverse pass; returns gradients in ``m.params`` order."""
    acts = cache.activations
    G = as_matrix(G, "G")
    if len(acts) != len(m.hidden) + 1:
        raise ValueError("cache does not belong to this model (layer count differs)")
    H_last = acts[-1]
    if G.shape != (m.V_out.shape[1], H_last.shape[0]) or H_last.shape[1] != m.V_out.shape[0]:
        raise ValueError(
            f"stale cache or bad gradient: G {G.shape}, last activation {H_last.shape}, "
            f"V_out {m.V_out.shape}"
        )
    dout = G.T  # d x k
    grad_out = H_last.T @ dout
    dH = dout @ m.V_out.T
    grads: list[np.ndarray] = []
    for layer in range(len(m.hidden) - 1, -1, -1):
        H = acts[layer + 1]
        dU = dH * (1.0 - H * H)
        grads.append(acts[layer].T @ dU)
        dH = dU @ m.hidden[layer].T
    grads.reverse()
    return [*grads, grad_out]


def init_model(
    kind: str,
    k: int,
    d: int,
    n: int,
    hidden_sizes=(10, 10),
    rng: np.random.Generator | None = None,
    X=None,
):
    """Random initial model.

    gbc: ``k`` distinct rows of ``X`` when given and ``k <= n``, otherwise
    Gaussian with sd 0.5. dgbc: Gaussian with sd ``1/sqrt(n)``. deep_dgbc:
    Gaussian with sd ``1/sqrt(fan_in)`` for every layer.
    """
    if k < 2:
        raise ValueError("need at least 2 prototypes")
    if rng is None:
        raise ValueError("init_model needs an explicit rng")
    if kind == "gbc":
        if X is not None:
            X = as_matrix(X, "X")
            if X.shape[1] != d:
                raise ValueError(f"X has {X.shape[1]} features, model expects {d}")
        if X is not None and k <= X.shape[0]:
            idx = rng.choice(X.shape[0], size=k, replace=False)
            return GbcModel(X[np.sort(idx)].copy())
        return GbcModel(0.5 * rng.standard_normal((k, d)))
    if kind == "dgbc":
        return DgbcModel(rng.standard_normal((k, n)) / np.sqrt(n))
    if kind == "deep_dgbc":
        sizes = [n, *[int(h) for h in hidden_sizes]]
        hidden = [
            rng.standard_normal((a, b)) / np.sqrt(a) for a, b in zip(sizes[:-1], sizes[1:])
        ]
        V_out = rng.standard_normal((sizes[-1], k)) / np.sqrt(sizes[-1])
        return DeepDgbcModel(hidden, V_out)
    raise ValueError(f"unknown model kind {kind!r}; expected one of {KINDS}")


def model_dims(model) -> dict:
    if model.kind == "gbc":
        return {"k": model.W1.shape[0], "d": model.W1.shape[1], "n": None, "hidden_sizes": []}
    if model.kind == "dgbc":
        return {"k": model.W2.shape[0], "d": None, "n": model.W2.shape[1], "hidden_sizes": []}
    n = model.hidden[0].shape[0] if model.hidden else model.V_out.shape[0]
    return {"k": model.k, "d": None, "n": n, "hidden_sizes": model.hidden_sizes}


@dataclass
class DualityReport:
    features_orthonormal: bool
    features_deviation: float
    samples_orthonormal: bool
    samples_deviation: float


def check_duality_conditions(X, tol: float = 1e-10) -> DualityReport:
    """Max-entry deviation of ``X.T @ X`` from I_d and of ``X @ X.T`` from I_n."""
    X = as_matrix(X, "X")
    n, d = X.shape
    dev_f = float(np.max(np.abs(X.T @ X - np.eye(d)))) if d else 0.0
    dev_s = float(np.max(np.abs(X @ X.T - np.eye(n)))) if n else 0.0
    return DualityReport(dev_f <= tol, dev_f, dev_s <= tol, dev_s)


# -- persistence -------------------------------------------------------------

def model_to_dict(model, d: int | None = None) -> dict:
    dims = model_dims(model)
    if dims["d"] is None:
        dims["d"] = d
    weights = [
        {"shape": list(W.shape), "data": W.ravel(order="C").tolist()} for W in model.params
    ]
    return {"kind": model.kind, **dims, "weights": weights}


def model_from_dict(obj: dict):
    kind = obj["kind"]
    mats = [
        np.array(w["data"], dtype=np.float64).reshape(w["shape"]) for w in obj["weights"]
    ]
    if kind == "gbc":
        (W1,) = mats
        return GbcModel(W1)
    if kind == "dgbc":
        (W2,) = mats
        return DgbcModel(W2)
    if kind == "deep_dgbc":
        return DeepDgbcModel(mats[:-1], mats[-1])
    raise ValueError(f"unknown model kind {kind!r}")


def save_model(model, path, d: int | None = None) -> None:
    text = json.dumps(model_to_dict(model, d))
    Path(path).write_text(text + "\n", encoding="utf-8", newline="\n")


def load_model(path):
    return model_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
