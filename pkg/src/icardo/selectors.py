"""Feature selection: RFE, LASSO, chi-square and forest importances.

Every selector produces a full ranking of columns; a FeatureSet of size k is
the ranking's first k entries, so sets from one run nest by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .data import Dataset
from .errors import ConvergenceError, TrainingError
from .featureset import SELECTOR_ORDER, FeatureSet, SelectorKind, set_id
from .learners import linear
from .learners.hyperparams import LogRegParams
from .numerics import Rng, sigmoid, soft_threshold, stable_argsort_desc, text_seed
from .trees import grow_gini_tree

DEFAULT_SIZES = (10, 15, 20, 25)


@dataclass(frozen=True)
class LassoConfig:
    lam: float = 0.01
    variant: str = "least_squares"  # least_squares | logistic
    fit_intercept: bool = True
    tol: float = 1e-6
    max_sweeps: int = 10_000
    max_halvings: int = 60


@dataclass(frozen=True)
class RFEConfig:
    base: LogRegParams = field(default_factory=LogRegParams)


@dataclass(frozen=True)
class ForestConfig:
    n_trees: int = 200
    max_features: str = "sqrt"  # sqrt | all
    min_samples_split: int = 2
    seed: int = 42


@dataclass(frozen=True)
class SelectorConfig:
    lasso: LassoConfig = field(default_factory=LassoConfig)
    rfe: RFEConfig = field(default_factory=RFEConfig)
    forest: ForestConfig = field(default_factory=ForestConfig)


def _check_scaled(dataset: Dataset) -> np.ndarray:
    if not dataset.encoded:
        raise ValueError("dataset must be label-encoded")
    return np.asarray(dataset.x, dtype=float)


def _check_k(dataset: Dataset, k: int) -> None:
    if not 1 <= k <= dataset.n_features:
        raise ValueError(f"k must lie in [1, {dataset.n_features}], got {k}")


def _make_set(dataset: Dataset, selector: SelectorKind, ranking, k: int, sizes) -> FeatureSet:
    idx = tuple(int(i) for i in ranking[:k])
    names = tuple(dataset.schema.features[i].name for i in idx)
    return FeatureSet(selector, k, idx, set_id(selector, k, sizes), names)


# -- chi-square --------------------------------------------------------------

def chi_square_scores(dataset: Dataset) -> np.ndarray:
    """Chi-square statistic between each column's mass and the class.

    Observed mass per class is the column sum over that class's rows; the
    expected mass is the column total times the class frequency. Cells with
    zero expectation contribute nothing.
    """
    x = _check_scaled(dataset)
    if (x < 0).any():
        raise ValueError("chi-square scoring needs non-negative features")
    y = np.asarray(dataset.y)
    n = len(y)
    scores = np.zeros(x.shape[1])
    total = x.sum(axis=0)
    for c in (0, 1):
        members = y == c
        if not members.any():
            raise TrainingError(f"class {c} has no rows")
        observed = x[members].sum(axis=0)
        expected = total * members.sum() / n
        safe = np.where(expected > 0, expected, 1.0)
        scores += np.where(expected > 0, (observed - expected) ** 2 / safe, 0.0)
    return scores


def chi2_ranking(dataset: Dataset) -> np.ndarray:
    return stable_argsort_desc(chi_square_scores(dataset))


# -- LASSO -------------------------------------------------------------------

def lasso_coordinate_descent(x: np.ndarray, y: np.ndarray, lam: float, *, fit_intercept: bool = True,
                             tol: float = 1e-6, max_sweeps: int = 10_000,
                             init: np.ndarray | None = None) -> tuple[np.ndarray, float, int]:
    """Cyclic coordinate descent for ``(1/2n)||y - b0 - Xb||^2 + lam*||b||_1``.

    Stops when a full sweep moves no coefficient by ``tol`` or more. Returns
    ``(coef, intercept, sweeps)``.
    """
    n, p = x.shape
    if fit_intercept:
        x_mean = x.mean(axis=0)
        y_mean = float(y.mean())
        xc = x - x_mean
        yc = y - y_mean
    else:
        x_mean = np.zeros(p)
        y_mean = 0.0
        xc, yc = x, y.astype(float)
    col_sq = (xc * xc).sum(axis=0) / n
    coef = np.zeros(p) if init is None else np.array(init, dtype=float)
    resid = yc - xc @ coef
    for sweep in range(1, max_sweeps + 1):
        max_step = 0.0
        for j in range(p):
            if col_sq[j] == 0.0:
                continue
            old = coef[j]
            rho = float(xc[:, j] @ resid) / n + col_sq[j] * old
            new = soft_threshold(rho, lam) / col_sq[j]
            if new != old:
                resid -= xc[:, j] * (new - old)
                coef[j] = new
                max_step = max(max_step, abs(new - old))
        if max_step < tol:
            return coef, y_mean - float(x_mean @ coef), sweep
    raise ConvergenceError(
        f"coordinate descent did not converge in {max_sweeps} sweeps",
        {"lam": lam, "last_max_step": max_step, "coef": coef.tolist()})


def logistic_lasso(x: np.ndarray, y: np.ndarray, lam: float, *, tol: float = 1e-6,
                   max_sweeps: int = 10_000, init: np.ndarray | None = None):
    """Proximal gradient (ISTA) for mean logistic loss plus ``lam*||b||_1``."""
    n, p = x.shape
    step = 1.0 / (0.25 * (np.linalg.norm(x, 2) ** 2 / n + 1.0))
    coef = np.zeros(p) if init is None else np.array(init, dtype=float)
    b0 = 0.0
    for it in range(1, max_sweeps + 1):
        r = sigmoid(x @ coef + b0) - y
        new = np.sign(coef - step * (x.T @ r / n)) * np.maximum(
            np.abs(coef - step * (x.T @ r / n)) - step * lam, 0.0)
        new_b0 = b0 - step * r.mean()
        move = max(float(np.max(np.abs(new - coef))), abs(new_b0 - b0))
        coef, b0 = new, new_b0
        if move < tol:
            return coef, b0, it
    raise ConvergenceError(f"proximal gradient did not converge in {max_sweeps} iterations",
                           {"lam": lam, "last_max_step": move, "coef": coef.tolist()})


def lasso_path(dataset: Dataset, k: int, config: LassoConfig = LassoConfig()) -> list[tuple[float, np.ndarray]]:
    """Fits at ``lam, lam/2, lam/4, ...`` until at least k coefficients are nonzero."""
    x = _check_scaled(dataset)
    y = np.asarray(dataset.y, dtype=float)
    lam = config.lam
    path = []
    coef = None
    for _ in range(config.max_halvings + 1):
        if config.variant == "logistic":
            coef, _, _ = logistic_lasso(x, y, lam, tol=config.tol, max_sweeps=config.max_sweeps, init=coef)
        else:
            coef, _, _ = lasso_coordinate_descent(x, y, lam, fit_intercept=config.fit_intercept,
                                                  tol=config.tol, max_sweeps=config.max_sweeps, init=coef)
        path.append((lam, coef.copy()))
        if np.count_nonzero(coef) >= k:
            break
        lam /= 2.0
    return path


def lasso_ranking(dataset: Dataset, k: int, config: LassoConfig = LassoConfig()) -> np.ndarray:
    """Columns ordered by the halving step at which they first turn nonzero,
    then by |coefficient| at that step, then by index.

    Columns that never turn nonzero trail in index order.
    """
    path = lasso_path(dataset, k, config)
    entered: dict[int, tuple[int, float]] = {}
    for step, (_, coef) in enumerate(path):
        for j in np.flatnonzero(coef):
            entered.setdefault(int(j), (step, -abs(float(coef[j]))))
    ranked = sorted(entered, key=lambda j: (*entered[j], j))
    rest = [j for j in range(dataset.n_features) if j not in entered]
    return np.array(ranked + rest, dtype=np.int64)


def lasso_select(dataset: Dataset, k: int, config: LassoConfig = LassoConfig(), sizes=None) -> FeatureSet:
    _check_k(dataset, k)
    return _make_set(dataset, SelectorKind.LASSO, lasso_ranking(dataset, k, config), k, sizes or [k])


# -- RFE ---------------------------------------------------------------------

def rfe_elimination_order(dataset: Dataset, stop_at: int = 1, config: RFEConfig = RFEConfig()) -> list[int]:
    """Columns in the order they are eliminated, one per round, until
    ``stop_at`` survive. The base estimator is refit on the survivors each
    round and the column with the smallest |weight| goes (lowest index on ties).
    """
    x = _check_scaled(dataset)
    y = np.asarray(dataset.y)
    surviving = list(range(dataset.n_features))
    eliminated: list[int] = []
    while len(surviving) > stop_at:
        try:
            params, _ = linear.fit(x[:, surviving], y, config.base)
        except Exception as exc:
            raise TrainingError(f"RFE base estimator failed with {len(surviving)} surviving features "
                                f"{surviving}: {exc}") from exc
        weights = np.abs(params["weights"])
        drop = int(np.argmin(weights))
        eliminated.append(surviving.pop(drop))
    return eliminated


def rfe_ranking(dataset: Dataset, config: RFEConfig = RFEConfig()) -> np.ndarray:
    order = rfe_elimination_order(dataset, 1, config)
    survivor = [j for j in range(dataset.n_features) if j not in order]
    return np.array(survivor + order[::-1], dtype=np.int64)


def rfe_select(dataset: Dataset, k: int, config: RFEConfig = RFEConfig(), sizes=None) -> FeatureSet:
    _check_k(dataset, k)
    if k == dataset.n_features:
        return _make_set(dataset, SelectorKind.RFE, np.arange(k), k, sizes or [k])
    return _make_set(dataset, SelectorKind.RFE, rfe_ranking(dataset, config), k, sizes or [k])


# -- forest importances ------------------------------------------------------

def forest_importances(dataset: Dataset, config: ForestConfig = ForestConfig()) -> np.ndarray:
    """Mean decrease in Gini impurity over a bagged forest, normalised to sum 1.

    Bootstrap rows and per-node candidate features come from one seeded
    generator; candidates are keyed by column name so a column permutation
    permutes the importances.
    """
    x = _check_scaled(dataset)
    y = np.asarray(dataset.y, dtype=float)
    if len(np.unique(y)) < 2:
        raise TrainingError("forest importances need both classes")
    n, p = x.shape
    m = max(1, int(math.floor(math.sqrt(p)))) if config.max_features == "sqrt" else p
    keys = [text_seed(f.name) for f in dataset.schema.features]
    rng = Rng(config.seed)
    total = np.zeros(p)
    for _ in range(config.n_trees):
        rows = rng.choice(n, n)
        imp = np.zeros(p)
        grow_gini_tree(x, y, rows, rng, keys, m, n, imp, config.min_samples_split)
        total += imp
    total /= config.n_trees
    s = total.sum()
    if s <= 0:
        return np.full(p, 1.0 / p)
    return total / s


def tree_ranking(dataset: Dataset, config: ForestConfig = ForestConfig()) -> np.ndarray:
    return stable_argsort_desc(forest_importances(dataset, config))


def tree_importance_select(dataset: Dataset, k: int, config: ForestConfig = ForestConfig(), sizes=None) -> FeatureSet:
    _check_k(dataset, k)
    return _make_set(dataset, SelectorKind.TREE, tree_ranking(dataset, config), k, sizes or [k])


def chi2_select(dataset: Dataset, k: int, sizes=None) -> FeatureSet:
    _check_k(dataset, k)
    return _make_set(dataset, SelectorKind.CHI2, chi2_ranking(dataset), k, sizes or [k])


# -- all sets ----------------------------------------------------------------

def selector_ranking(dataset: Dataset, selector: SelectorKind, max_k: int,
                     config: SelectorConfig = SelectorConfig()) -> np.ndarray:
    selector = SelectorKind(selector)
    if selector is SelectorKind.CHI2:
        return chi2_ranking(dataset)
    if selector is SelectorKind.LASSO:
        return lasso_ranking(dataset, max_k, config.lasso)
    if selector is SelectorKind.RFE:
        return rfe_ranking(dataset, config.rfe)
    return tree_ranking(dataset, config.forest)


def select(dataset: Dataset, selector: SelectorKind, k: int, config: SelectorConfig = SelectorConfig(),
           sizes=None) -> FeatureSet:
    _check_k(dataset, k)
    ranking = selector_ranking(dataset, selector, k, config)
    return _make_set(dataset, SelectorKind(selector), ranking, k, sizes or [k])


def build_all_feature_sets(dataset: Dataset, sizes=DEFAULT_SIZES, selectors=SELECTOR_ORDER,
                           config: SelectorConfig = SelectorConfig()) -> list[FeatureSet]:
    """One ranking per selector, cut at every size. Pass training rows only."""
    sizes = list(sizes)
    if not sizes:
        raise ValueError("at least one feature-set size is required")
    for k in sizes:
        _check_k(dataset, k)
    out = []
    for selector in selectors:
        ranking = selector_ranking(dataset, selector, max(sizes), config)
        for k in sorted(set(sizes)):
            out.append(_make_set(dataset, SelectorKind(selector), ranking, k, sizes))
    return out
