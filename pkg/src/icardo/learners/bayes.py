from __future__ import annotations

import numpy as np

from .hyperparams import NaiveBayesParams


def fit(x: np.ndarray, y: np.ndarray, hp: NaiveBayesParams, rng=None):
    priors, means, variances = [], [], []
    for c in (0, 1):
        xc = x[y == c]
        priors.append(len(xc) / len(x))
        means.append(xc.mean(axis=0))
        variances.append(np.maximum(xc.var(axis=0), hp.var_floor))
    return {"priors": np.array(priors), "means": np.array(means), "variances": np.array(variances)}, True


def joint_log_likelihood(params: dict, x: np.ndarray) -> np.ndarray:
    """``log P(c) + sum_j log N(x_j; mu_cj, var_cj)`` per row and class."""
    priors = np.asarray(params["priors"], dtype=float)
    means = np.asarray(params["means"], dtype=float)
    var = np.asarray(params["variances"], dtype=float)
    out = np.empty((len(x), 2))
    for c in (0, 1):
        ll = -0.5 * np.sum(np.log(2.0 * np.pi * var[c]) + (x - means[c]) ** 2 / var[c], axis=1)
        out[:, c] = np.log(priors[c]) + ll
    return out


def decision(params: dict, x: np.ndarray) -> np.ndarray:
    """Posterior probability of class 1."""
    jll = joint_log_likelihood(params, x)
    diff = jll[:, 0] - jll[:, 1]
    return 1.0 / (1.0 + np.exp(np.clip(diff, -700, 700)))


def labels_from_joint(jll: np.ndarray) -> np.ndarray:
    return (jll[:, 1] > jll[:, 0]).astype(np.int64)
