"""Soft-margin kernel SVM trained by SMO with second-order working-set
selection (Fan, Chen & Lin 2005)."""

from __future__ import annotations

import numpy as np

from .hyperparams import SVMParams

TAU = 1e-12


def kernel_matrix(a: np.ndarray, b: np.ndarray, kernel: str, gamma: float,
                  degree: int = 3, coef0: float = 1.0) -> np.ndarray:
    if kernel == "linear":
        return a @ b.T
    if kernel == "poly":
        return (gamma * (a @ b.T) + coef0) ** degree
    if kernel == "rbf":
        sq = (a * a).sum(1)[:, None] + (b * b).sum(1)[None, :] - 2.0 * (a @ b.T)
        return np.exp(-gamma * np.maximum(sq, 0.0))
    raise ValueError(f"unknown kernel {kernel!r}")


def solve_dual(K: np.ndarray, y: np.ndarray, C: float, tol: float, max_iter: int):
    """Minimise ``0.5 a'Qa - sum(a)`` with ``Q = yy'K``, ``0 <= a <= C``, ``y'a = 0``.

    ``y`` in {-1, +1}. Returns ``(alpha, rho, iterations, converged)``; the
    decision function is ``sum_i alpha_i y_i K(x_i, x) - rho``.
    """
    n = len(y)
    alpha = np.zeros(n)
    grad = -np.ones(n)
    diag = np.diag(K).copy()
    converged = False
    it = 0
    while it < max_iter:
        up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
        low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < C))
        score = -y * grad
        if not up.any() or not low.any():
            converged = True
            break
        i = int(np.flatnonzero(up)[np.argmax(score[up])])
        g_max = score[i]
        g_min = score[low].min()
        if g_max - g_min < tol:
            converged = True
            break
        # second-order choice of j among violating low-set members
        b = g_max - score
        cand = low & (b > 0)
        a = diag[i] + diag - 2.0 * K[i]
        a = np.where(a > 0, a, TAU)
        gain = np.where(cand, -(b * b) / a, np.inf)
        j = int(np.argmin(gain))
        it += 1

        yi, yj = y[i], y[j]
        ai_old, aj_old = alpha[i], alpha[j]
        quad = diag[i] + diag[j] - 2.0 * K[i, j]
        if quad <= 0:
            quad = TAU
        if yi != yj:
            delta = (-grad[i] - grad[j]) / quad
            diff = alpha[i] - alpha[j]
            alpha[i] += delta
            alpha[j] += delta
            if diff > 0:
                if alpha[j] < 0:
                    alpha[j] = 0.0
                    alpha[i] = diff
            elif alpha[i] < 0:
                alpha[i] = 0.0
                alpha[j] = -diff
            if diff > 0:
                if alpha[i] > C:
                    alpha[i] = C
                    alpha[j] = C - diff
            elif alpha[j] > C:
                alpha[j] = C
                alpha[i] = C + diff
        else:
            delta = (grad[i] - grad[j]) / quad
            total = alpha[i] + alpha[j]
            alpha[i] -= delta
            alpha[j] += delta
            if total > C:
                if alpha[i] > C:
                    alpha[i] = C
                    alpha[j] = total - C
            elif alpha[j] < 0:
                alpha[j] = 0.0
                alpha[i] = total
            if total > C:
                if alpha[j] > C:
                    alpha[j] = C
                    alpha[i] = total - C
            elif alpha[i] < 0:
                alpha[i] = 0.0
                alpha[j] = total
        d_i = alpha[i] - ai_old
        d_j = alpha[j] - aj_old
        grad += y * (yi * d_i * K[i] + yj * d_j * K[j])

    rho = _rho(alpha, grad, y, C)
    return alpha, rho, it, converged


def _rho(alpha, grad, y, C):
    yg = y * grad
    free = (alpha > 0) & (alpha < C)
    if free.any():
        return float(yg[free].mean())
    up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
    low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < C))
    ub = yg[up].min() if up.any() else np.inf
    lb = yg[low].max() if low.any() else -np.inf
    if not np.isfinite(ub):
        ub = lb
    if not np.isfinite(lb):
        lb = ub
    return float((ub + lb) / 2.0)


def resolve_gamma(hp: SVMParams, n_features: int) -> float:
    return float(hp.gamma) if hp.gamma is not None else 1.0 / n_features


def fit(x: np.ndarray, y: np.ndarray, hp: SVMParams, rng=None):
    ys = np.where(y == 1, 1.0, -1.0)
    gamma = resolve_gamma(hp, x.shape[1])
    K = kernel_matrix(x, x, hp.kernel, gamma, hp.degree, hp.coef0)
    alpha, rho, iterations, converged = solve_dual(K, ys, hp.C, hp.tol, hp.max_iter)
    sv = np.flatnonzero(alpha > 0)
    params = {
        "support_indices": sv,
        "support_vectors": x[sv],
        "support_labels": ys[sv],
        "dual": alpha[sv],
        "rho": rho,
        "gamma": gamma,
        "iterations": iterations,
    }
    return params, converged


def decision(params: dict, x: np.ndarray, hp: SVMParams) -> np.ndarray:
    sv = np.asarray(params["support_vectors"], dtype=float)
    if len(sv) == 0:
        return np.full(len(x), -params["rho"])
    K = kernel_matrix(x, sv, hp.kernel, params["gamma"], hp.degree, hp.coef0)
    coef = np.asarray(params["dual"]) * np.asarray(params["support_labels"])
    return K @ coef - params["rho"]


def labels(params: dict, scores: np.ndarray) -> np.ndarray:
    return (scores > 0).astype(np.int64)


def kkt_violation(x: np.ndarray, y: np.ndarray, params: dict, hp: SVMParams) -> float:
    """Largest KKT residual of a trained model on its own training rows.

    For each row with margin ``m = y f(x)``: ``alpha = 0`` needs ``m >= 1``;
    ``alpha = C`` needs ``m <= 1``; free rows need ``m == 1``.
    """
    ys = np.where(y == 1, 1.0, -1.0)
    alpha = np.zeros(len(y))
    alpha[np.asarray(params["support_indices"], dtype=np.int64)] = params["dual"]
    margin = ys * decision(params, x, hp)
    at_zero = alpha <= 0
    at_c = alpha >= hp.C
    free = ~at_zero & ~at_c
    viol = np.zeros(len(y))
    viol[at_zero] = np.maximum(0.0, 1.0 - margin[at_zero])
    viol[at_c] = np.maximum(0.0, margin[at_c] - 1.0)
    viol[free] = np.abs(margin[free] - 1.0)
    return float(viol.max()) if len(viol) else 0.0
