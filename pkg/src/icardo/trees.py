"""CART trees: Gini classification trees (forest importances) and
least-squares regression trees (gradient boosting)."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .numerics import Rng, fmix64


@dataclass
class Tree:
    feature: list[int] = field(default_factory=list)
    threshold: list[float] = field(default_factory=list)
    left: list[int] = field(default_factory=list)
    right: list[int] = field(default_factory=list)
    value: list[float] = field(default_factory=list)

    def add_node(self, value: float) -> int:
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.value.append(float(value))
        return len(self.feature) - 1

    def apply(self, x: np.ndarray) -> np.ndarray:
        """Leaf id reached by each row (``x <= threshold`` goes left)."""
        feature = np.asarray(self.feature)
        threshold = np.asarray(self.threshold)
        left = np.asarray(self.left)
        right = np.asarray(self.right)
        node = np.zeros(len(x), dtype=np.int64)
        rows = np.arange(len(x))
        active = feature[node] >= 0
        while active.any():
            r = rows[active]
            nd = node[r]
            go_left = x[r, feature[nd]] <= threshold[nd]
            node[r] = np.where(go_left, left[nd], right[nd])
            active = feature[node] >= 0
        return node

    def predict(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(self.value)[self.apply(np.asarray(x, dtype=float))]

    @property
    def depth(self) -> int:
        def walk(i: int) -> int:
            if self.feature[i] < 0:
                return 0
            return 1 + max(walk(self.left[i]), walk(self.right[i]))
        return walk(0) if self.feature else 0

    def to_dict(self) -> dict:
        return {"feature": list(self.feature), "threshold": list(self.threshold),
                "left": list(self.left), "right": list(self.right), "value": list(self.value)}

    @classmethod
    def from_dict(cls, d: dict) -> "Tree":
        return cls([int(v) for v in d["feature"]], [float(v) for v in d["threshold"]],
                   [int(v) for v in d["left"]], [int(v) for v in d["right"]],
                   [float(v) for v in d["value"]])


def _best_gini_split(values: np.ndarray, labels: np.ndarray):
    """Lowest weighted child Gini (sum n_child * gini_child) for one feature."""
    order = np.argsort(values, kind="stable")
    v = values[order]
    y = labels[order]
    n = len(v)
    valid = v[:-1] < v[1:]
    if not valid.any():
        return None
    n_left = np.arange(1, n, dtype=float)
    n_right = n - n_left
    pos_left = np.cumsum(y)[:-1].astype(float)
    pos_right = y.sum() - pos_left
    gini_left = 2.0 * pos_left * (n_left - pos_left) / n_left  # n_left * gini
    gini_right = 2.0 * pos_right * (n_right - pos_right) / n_right
    cost = np.where(valid, gini_left + gini_right, np.inf)
    i = int(np.argmin(cost))
    return float(cost[i]), float((v[i] + v[i + 1]) / 2.0)


def grow_gini_tree(x: np.ndarray, y: np.ndarray, rows: np.ndarray, rng: Rng,
                   feature_keys: list[int], max_features: int, n_total: int,
                   importance: np.ndarray, min_samples_split: int = 2) -> Tree:
    """Fully grown classification tree on ``rows`` (duplicates allowed).

    Candidate features at each node are visited in an order given by hashing
    a per-node draw with each feature's key, so the tree does not depend on
    column positions. At least ``max_features`` candidates are examined and
    more are tried until a usable split turns up. Weighted Gini decreases,
    normalised by ``n_total``, accumulate into ``importance``.
    """
    tree = Tree()
    n_feat = x.shape[1]
    root = tree.add_node(float(y[rows].mean()))
    stack = [(root, rows)]
    while stack:
        node, idx = stack.pop()
        yi = y[idx]
        n = len(idx)
        pos = float(yi.sum())
        node_cost = 2.0 * pos * (n - pos) / n
        if n < min_samples_split or node_cost <= 0.0:
            continue
        key = rng.next_u64()
        order = sorted(range(n_feat), key=lambda j: (fmix64(key ^ feature_keys[j]), j))
        best = None
        tried = 0
        for j in order:
            if tried >= max_features and best is not None:
                break
            tried += 1
            found = _best_gini_split(x[idx, j], yi)
            if found is not None and (best is None or found[0] < best[0]):
                best = (found[0], found[1], j)
        if best is None:
            continue
        cost, thr, j = best
        importance[j] += (node_cost - cost) / n_total
        mask = x[idx, j] <= thr
        li, ri = idx[mask], idx[~mask]
        tree.feature[node] = j
        tree.threshold[node] = thr
        tree.left[node] = tree.add_node(float(y[li].mean()))
        tree.right[node] = tree.add_node(float(y[ri].mean()))
        stack.append((tree.right[node], ri))
        stack.append((tree.left[node], li))
    return tree


def _best_sse_split(values: np.ndarray, target: np.ndarray, min_leaf: int):
    order = np.argsort(values, kind="stable")
    v = values[order]
    t = target[order]
    n = len(v)
    if n < 2 * min_leaf:
        return None
    n_left = np.arange(1, n, dtype=float)
    s_left = np.cumsum(t)[:-1]
    s_right = t.sum() - s_left
    valid = (v[:-1] < v[1:]) & (n_left >= min_leaf) & (n - n_left >= min_leaf)
    if not valid.any():
        return None
    score = np.where(valid, s_left ** 2 / n_left + s_right ** 2 / (n - n_left), -np.inf)
    i = int(np.argmax(score))
    return float(score[i]), float((v[i] + v[i + 1]) / 2.0)


def grow_regression_tree(x: np.ndarray, target: np.ndarray, max_depth: int, min_leaf: int,
                         leaf_value=None) -> Tree:
    """Least-squares regression tree of bounded depth.

    ``leaf_value(rows)`` computes each leaf's output; defaults to the mean
    target. Ties between features go to the lowest column index.
    """
    if leaf_value is None:
        def leaf_value(rows):
            return float(target[rows].mean())
    tree = Tree()
    all_rows = np.arange(len(target))
    root = tree.add_node(leaf_value(all_rows))
    stack = [(root, all_rows, 0)]
    while stack:
        node, idx, depth = stack.pop()
        if depth >= max_depth:
            continue
        t = target[idx]
        base = t.sum() ** 2 / len(idx)
        best = None
        for j in range(x.shape[1]):
            found = _best_sse_split(x[idx, j], t, min_leaf)
            if found is not None and found[0] > base + 1e-12 and (best is None or found[0] > best[0]):
                best = (found[0], found[1], j)
        if best is None:
            continue
        _, thr, j = best
        mask = x[idx, j] <= thr
        li, ri = idx[mask], idx[~mask]
        tree.feature[node] = j
        tree.threshold[node] = thr
        tree.left[node] = tree.add_node(leaf_value(li))
        tree.right[node] = tree.add_node(leaf_value(ri))
        stack.append((tree.right[node], ri, depth + 1))
        stack.append((tree.left[node], li, depth + 1))
    return tree
