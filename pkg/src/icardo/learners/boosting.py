"""AdaBoost over decision stumps (SAMME, two classes) and logistic-loss
gradient boosting over shallow regression trees."""

from __future__ import annotations

import numpy as np

from ..numerics import sigmoid
from ..trees import Tree, grow_regression_tree
from .hyperparams import AdaBoostParams, GradBoostParams

MIN_ERR = 1e-10


def best_stump(x: np.ndarray, ys: np.ndarray, w: np.ndarray):
    """Lowest weighted-error stump ``s if x_j > t else -s``.

    Returns ``(error, feature, threshold, polarity)`` or None when every
    column is constant. Ties resolve to the lowest feature, then the lowest
    threshold, then polarity +1.
    """
    total = w.sum()
    best = None
    for j in range(x.shape[1]):
        order = np.argsort(x[:, j], kind="stable")
        v = x[order, j]
        valid = v[:-1] < v[1:]
        if not valid.any():
            continue
        wpos = np.where(ys[order] > 0, w[order], 0.0)
        wneg = np.where(ys[order] < 0, w[order], 0.0)
        # polarity +1: left (<= t) predicted -1, right predicted +1
        pos_left = np.cumsum(wpos)[:-1]
        neg_right = wneg.sum() - np.cumsum(wneg)[:-1]
        err_plus = (pos_left + neg_right) / total
        err_minus = 1.0 - err_plus
        err_plus = np.where(valid, err_plus, np.inf)
        err_minus = np.where(valid, err_minus, np.inf)
        for err, pol in ((err_plus, 1), (err_minus, -1)):
            i = int(np.argmin(err))
            e = float(err[i])
            if best is None or e < best[0] - 1e-15:
                best = (e, j, float((v[i] + v[i + 1]) / 2.0), pol)
    return best


def stump_predict(x: np.ndarray, feature: int, threshold: float, polarity: int) -> np.ndarray:
    return np.where(x[:, feature] > threshold, polarity, -polarity).astype(float)


def fit_adaboost(x: np.ndarray, y: np.ndarray, hp: AdaBoostParams, rng=None):
    ys = np.where(y == 1, 1.0, -1.0)
    n = len(y)
    w = np.full(n, 1.0 / n)
    stumps: list[dict] = []
    for _ in range(hp.n_stumps):
        found = best_stump(x, ys, w)
        if found is None:
            break
        err, j, thr, pol = found
        if err >= 0.5:
            break
        alpha = float(np.log((1.0 - max(err, MIN_ERR)) / max(err, MIN_ERR)))
        stumps.append({"feature": j, "threshold": thr, "polarity": pol, "alpha": alpha})
        if err <= MIN_ERR:
            break
        miss = stump_predict(x, j, thr, pol) != ys
        w = w * np.exp(alpha * miss)
        w /= w.sum()
    ones = int(y.sum())
    majority = 1 if ones > n - ones else 0
    return {"stumps": stumps, "majority": majority}, True


def adaboost_decision(params: dict, x: np.ndarray, n_stumps: int | None = None) -> np.ndarray:
    stumps = params["stumps"] if n_stumps is None else params["stumps"][:n_stumps]
    if not stumps:
        return np.full(len(x), 1.0 if params["majority"] == 1 else -1.0)
    score = np.zeros(len(x))
    for s in stumps:
        score += s["alpha"] * stump_predict(x, s["feature"], s["threshold"], s["polarity"])
    return score


def fit_gradboost(x: np.ndarray, y: np.ndarray, hp: GradBoostParams, rng=None):
    p0 = float(np.clip(y.mean(), 1e-6, 1 - 1e-6))
    base = float(np.log(p0 / (1.0 - p0)))
    f = np.full(len(y), base)
    trees: list[Tree] = []
    for _ in range(hp.n_rounds):
        p = sigmoid(f)
        resid = y - p
        if hp.newton:
            hess = np.maximum(p * (1.0 - p), 1e-12)

            def leaf(rows, r=resid, h=hess):
                return float(r[rows].sum() / h[rows].sum())
        else:
            leaf = None
        tree = grow_regression_tree(x, resid, hp.depth, hp.min_leaf, leaf)
        trees.append(tree)
        f = f + hp.shrinkage * tree.predict(x)
    return {"base": base, "trees": trees}, True


def gradboost_margin(params: dict, x: np.ndarray, hp: GradBoostParams, n_rounds: int | None = None) -> np.ndarray:
    trees = params["trees"] if n_rounds is None else params["trees"][:n_rounds]
    f = np.full(len(x), params["base"])
    for tree in trees:
        f = f + hp.shrinkage * tree.predict(x)
    return f
