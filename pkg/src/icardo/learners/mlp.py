"""One-hidden-layer network with logistic units, trained by online backprop."""

from __future__ import annotations

import numpy as np

from ..numerics import Rng, sigmoid
from .hyperparams import MLPParams

CONVERGENCE_TOL = 1e-3


def unpack(theta: np.ndarray, n_in: int, hidden: int):
    a = hidden * n_in
    w1 = theta[:a].reshape(hidden, n_in)
    b1 = theta[a:a + hidden]
    w2 = theta[a + hidden:a + 2 * hidden]
    b2 = theta[a + 2 * hidden]
    return w1, b1, w2, b2


def pack(w1, b1, w2, b2) -> np.ndarray:
    return np.concatenate([np.ravel(w1), np.ravel(b1), np.ravel(w2), [float(b2)]])


def forward(theta: np.ndarray, x: np.ndarray, hidden: int):
    w1, b1, w2, b2 = unpack(theta, x.shape[1], hidden)
    h = sigmoid(x @ w1.T + b1)
    z = h @ w2 + b2
    return h, z


def loss_and_grad(theta: np.ndarray, x: np.ndarray, y: np.ndarray, hidden: int):
    """Mean binary cross-entropy and its gradient with respect to ``theta``."""
    w1, b1, w2, b2 = unpack(theta, x.shape[1], hidden)
    h, z = forward(theta, x, hidden)
    loss = float(np.mean(np.logaddexp(0.0, z) - y * z))
    dz = (sigmoid(z) - y) / len(y)
    g_w2 = h.T @ dz
    g_b2 = dz.sum()
    dh = np.outer(dz, w2) * h * (1.0 - h)
    g_w1 = dh.T @ x
    g_b1 = dh.sum(axis=0)
    return loss, pack(g_w1, g_b1, g_w2, g_b2)


def init_theta(n_in: int, hidden: int, rng: Rng) -> np.ndarray:
    size = hidden * n_in + 2 * hidden + 1
    return rng.uniform(-0.5, 0.5, size)


def fit(x: np.ndarray, y: np.ndarray, hp: MLPParams, rng: Rng):
    """Per-sample SGD; rows are visited in a fresh seeded order each epoch."""
    n, d = x.shape
    theta = init_theta(d, hp.hidden, rng)
    w1, b1, w2, b2 = (p.copy() for p in unpack(theta, d, hp.hidden))
    b2 = float(b2)
    lr = hp.lr
    for _ in range(hp.epochs):
        for i in rng.permutation(n):
            xi = x[i]
            h = 1.0 / (1.0 + np.exp(-(w1 @ xi + b1)))
            z = h @ w2 + b2
            p = 1.0 / (1.0 + np.exp(-z)) if z >= 0 else np.exp(z) / (1.0 + np.exp(z))
            dz = p - y[i]
            dh = dz * w2 * h * (1.0 - h)
            w2 -= lr * dz * h
            b2 -= lr * dz
            w1 -= lr * np.outer(dh, xi)
            b1 -= lr * dh
    theta = pack(w1, b1, w2, b2)
    _, grad = loss_and_grad(theta, x, y, hp.hidden)
    converged = bool(np.all(np.isfinite(theta)) and np.max(np.abs(grad)) < CONVERGENCE_TOL)
    return {"w1": w1, "b1": b1, "w2": w2, "b2": b2}, converged


def decision(params: dict, x: np.ndarray) -> np.ndarray:
    w1 = np.asarray(params["w1"], dtype=float)
    h = sigmoid(x @ w1.T + np.asarray(params["b1"], dtype=float))
    return sigmoid(h @ np.asarray(params["w2"], dtype=float) + params["b2"])


def labels(params: dict, scores: np.ndarray) -> np.ndarray:
    return (scores > 0.5).astype(np.int64)
