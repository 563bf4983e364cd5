"""Small feed-forward scoring models f: R^d -> (0, 1) with hand-written backprop.

Hidden layers use tanh; the output is a logistic map of a scalar logit.
Weights are initialized N(0, 1/fan_in) (LeCun normal) with zero biases.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .dataio import make_rng

# Logits are clipped here so scores stay strictly inside (0, 1) in float64.
LOGIT_CLIP = 36.0


def parse_arch(arch) -> tuple[int, ...]:
    """``"linear"`` -> (), ``"mlp:8,4"`` or ``("mlp", (8, 4))`` -> (8, 4)."""
    if isinstance(arch, str):
        if arch == "linear":
            return ()
        kind, _, sizes = arch.partition(":")
        if kind != "mlp" or not sizes:
            raise ValueError(f"bad architecture {arch!r}; use 'linear' or 'mlp:H1[,H2...]'")
        hidden = tuple(int(h) for h in sizes.split(","))
    elif isinstance(arch, (tuple, list)) and len(arch) == 2 and arch[0] == "mlp":
        hidden = tuple(int(h) for h in arch[1])
        if not hidden:
            raise ValueError("empty architecture: mlp needs at least one hidden layer")
    else:
        hidden = tuple(int(h) for h in arch)
    if any(h < 1 for h in hidden):
        raise ValueError("hidden sizes must be positive")
    return hidden


def arch_name(hidden: tuple[int, ...]) -> str:
    return "linear" if not hidden else "mlp:" + ",".join(map(str, hidden))


@dataclass
class ModelParams:
    hidden: tuple[int, ...]
    weights: list[np.ndarray]
    biases: list[np.ndarray]

    @property
    def d(self) -> int:
        return self.weights[0].shape[0]

    @property
    def arch(self) -> str:
        return arch_name(self.hidden)

    @property
    def size(self) -> int:
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))

    def flat(self) -> np.ndarray:
        parts = []
        for w, b in zip(self.weights, self.biases):
            parts += [w.ravel(), b.ravel()]
        return np.concatenate(parts)

    def with_flat(self, theta) -> "ModelParams":
        theta = np.asarray(theta, dtype=float)
        if theta.size != self.size:
            raise ValueError(f"expected {self.size} parameters, got {theta.size}")
        ws, bs, k = [], [], 0
        for w, b in zip(self.weights, self.biases):
            ws.append(theta[k:k + w.size].reshape(w.shape))
            k += w.size
            bs.append(theta[k:k + b.size].reshape(b.shape))
            k += b.size
        return ModelParams(self.hidden, ws, bs)

    def copy(self) -> "ModelParams":
        return self.with_flat(self.flat().copy())

    def to_dict(self) -> dict:
        return {"arch": self.arch, "d": self.d, "theta": self.flat().tolist()}

    @classmethod
    def from_dict(cls, obj: dict) -> "ModelParams":
        template = init_params(obj["arch"], int(obj["d"]), seed=0)
        return template.with_flat(obj["theta"])

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "ModelParams":
        return cls.from_dict(json.loads(text))


def layer_shapes(hidden: tuple[int, ...], d: int) -> list[tuple[int, int]]:
    sizes = [d, *hidden, 1]
    return list(zip(sizes[:-1], sizes[1:]))


def init_params(arch, d: int, seed: int | np.random.SeedSequence = 0) -> ModelParams:
    if d < 1:
        raise ValueError("input dimension must be >= 1")
    hidden = parse_arch(arch)
    rng = make_rng(seed)
    ws, bs = [], []
    for fan_in, fan_out in layer_shapes(hidden, d):
        ws.append(rng.standard_normal((fan_in, fan_out)) / np.sqrt(fan_in))
        bs.append(np.zeros(fan_out))
    return ModelParams(hidden, ws, bs)


def _check_dim(params: ModelParams, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.shape[1] != params.d:
        raise ValueError(f"model expects {params.d} features, got {X.shape[1]}")
    return X


def _forward(params: ModelParams, X: np.ndarray):
    acts = [X]
    a = X
    for w, b in zip(params.weights[:-1], params.biases[:-1]):
        a = np.tanh(a @ w + b)
        acts.append(a)
    logit = (a @ params.weights[-1] + params.biases[-1])[:, 0]
    clipped = np.clip(logit, -LOGIT_CLIP, LOGIT_CLIP)
    return expit(clipped), acts, np.abs(logit) < LOGIT_CLIP


def forward_scores(params: ModelParams, features) -> np.ndarray:
    X = _check_dim(params, features)
    return _forward(params, X)[0]


def backward_scores(params: ModelParams, features, upstream) -> np.ndarray:
    """Gradient (flat, same layout as ``params.flat()``) of ``sum_i upstream_i * score_i``."""
    X = _check_dim(params, features)
    scores, acts, live = _forward(params, X)
    return _backward(params, scores, acts, live, np.asarray(upstream, dtype=float))


def _backward(params, scores, acts, live, upstream):
    if upstream.shape != scores.shape:
        raise ValueError("upstream must have one entry per row")
    g = (upstream * scores * (1.0 - scores) * live)[:, None]
    grads = []
    for layer in range(len(params.weights) - 1, -1, -1):
        a_in = acts[layer]
        grads.append((params.biases[layer].shape, g.sum(axis=0)))
        grads.append((params.weights[layer].shape, a_in.T @ g))
        if layer > 0:
            g = (g @ params.weights[layer].T) * (1.0 - a_in ** 2)
    grads.reverse()
    return np.concatenate([gr.ravel() for _, gr in grads])


def scores_and_vjp(params: ModelParams, features):
    """Forward pass returning scores and a closure mapping upstream -> flat gradient."""
    X = _check_dim(params, features)
    scores, acts, live = _forward(params, X)

    def vjp(upstream):
        return _backward(params, scores, acts, live, np.asarray(upstream, dtype=float))

    return scores, vjp
