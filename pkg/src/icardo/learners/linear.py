"""L2-regularised logistic regression by full-batch gradient descent."""

from __future__ import annotations

import numpy as np

from ..numerics import sigmoid
from .hyperparams import LogRegParams


def loss_and_grad(theta: np.ndarray, x: np.ndarray, y: np.ndarray, l2: float):
    """Mean log-loss plus ``l2/2 * ||w||^2``; ``theta = [w..., b]`` (bias unpenalised)."""
    w, b = theta[:-1], theta[-1]
    z = x @ w + b
    # log(1 + e^z) - y z, computed without overflow
    loss = np.mean(np.logaddexp(0.0, z) - y * z) + 0.5 * l2 * float(w @ w)
    r = sigmoid(z) - y
    grad = np.empty_like(theta)
    grad[:-1] = x.T @ r / len(y) + l2 * w
    grad[-1] = r.mean()
    return float(loss), grad


def fit(x: np.ndarray, y: np.ndarray, hp: LogRegParams, rng=None):
    theta = np.zeros(x.shape[1] + 1)
    converged = False
    for _ in range(hp.epochs):
        _, grad = loss_and_grad(theta, x, y, hp.l2)
        if np.max(np.abs(grad)) < hp.grad_tol:
            converged = True
            break
        theta -= hp.lr * grad
    else:
        _, grad = loss_and_grad(theta, x, y, hp.l2)
        converged = bool(np.max(np.abs(grad)) < hp.grad_tol)
    return {"weights": theta[:-1], "bias": float(theta[-1])}, converged


def decision(params: dict, x: np.ndarray) -> np.ndarray:
    """Probability of class 1."""
    return sigmoid(x @ np.asarray(params["weights"]) + params["bias"])


def labels(params: dict, scores: np.ndarray) -> np.ndarray:
    # exactly 0.5 is a tie and goes to class 0
    return (scores > 0.5).astype(np.int64)
