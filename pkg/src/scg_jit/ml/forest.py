from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

logger = logging.getLogger(__name__)

Array = npt.NDArray[np.float64]
IntArray = npt.NDArray[np.int64]

LEAF = -1


def tree_rng(seed: int, tree_index: int) -> np.random.Generator:
    """Counter-based stream of one tree, independent of the order trees are built in."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, tree_index])))


def bootstrap_indices(seed: int, tree_index: int, n: int) -> IntArray:
    """Bootstrap sample (with replacement, size n) drawn for tree `tree_index`."""
    return tree_rng(seed, tree_index).integers(0, n, size=n)


@dataclass(frozen=True)
class DecisionTree:
    """Array-encoded binary tree; `feature[i] == LEAF` marks leaf i."""

    feature: IntArray
    threshold: Array
    left: IntArray
    right: IntArray
    value: IntArray

    @property
    def node_count(self) -> int:
        return len(self.feature)

    def depth(self) -> int:
        deepest = 0
        stack = [(0, 0)]
        while stack:
            node, d = stack.pop()
            deepest = max(deepest, d)
            if self.feature[node] != LEAF:
                stack += [(int(self.left[node]), d + 1), (int(self.right[node]), d + 1)]
        return deepest

    def predict(self, X: Array) -> IntArray:
        node = np.zeros(len(X), dtype=np.int64)
        active = self.feature[node] != LEAF
        while active.any():
            rows = np.flatnonzero(active)
            cur = node[rows]
            go_left = X[rows, self.feature[cur]] <= self.threshold[cur]
            node[rows] = np.where(go_left, self.left[cur], self.right[cur])
            active = self.feature[node] != LEAF
        return self.value[node]


def _gini(pos: Array, total: Array) -> Array:
    p = pos / total
    return 2.0 * p * (1.0 - p)


def _best_split(x: Array, y: IntArray) -> tuple[float, float] | None:
    """Lowest weighted Gini split of one feature column, as (impurity, threshold)."""
    order = np.argsort(x, kind="stable")
    xs, ys = x[order], y[order]
    valid = xs[:-1] < xs[1:]
    if not valid.any():
        return None
    m = len(xs)
    n_left = np.arange(1, m, dtype=np.float64)
    n_right = m - n_left
    pos_left = np.cumsum(ys)[:-1].astype(np.float64)
    pos_right = ys.sum() - pos_left
    impurity = (n_left * _gini(pos_left, n_left) + n_right * _gini(pos_right, n_right)) / m
    impurity = np.where(valid, impurity, np.inf)
    i = int(np.argmin(impurity))
    return float(impurity[i]), float((xs[i] + xs[i + 1]) / 2.0)


def fit_tree(X: Array, y: IntArray, rng: np.random.Generator, max_depth: int, max_features: int) -> DecisionTree:
    feature: list[int] = []
    threshold: list[float] = []
    left: list[int] = []
    right: list[int] = []
    value: list[int] = []

    def new_node(idx: IntArray) -> int:
        feature.append(LEAF)
        threshold.append(0.0)
        left.append(LEAF)
        right.append(LEAF)
        positives = int(y[idx].sum())
        value.append(1 if 2 * positives > len(idx) else 0)
        return len(feature) - 1

    root = new_node(np.arange(len(y)))
    stack = [(root, np.arange(len(y)), 0)]
    while stack:
        node, idx, depth = stack.pop()
        labels = y[idx]
        if depth >= max_depth or len(idx) < 2 or labels.min() == labels.max():
            continue
        candidates = rng.choice(X.shape[1], size=max_features, replace=False)
        best: tuple[float, int, float] | None = None
        for f in candidates:
            split = _best_split(X[idx, f], labels)
            if split is not None and (best is None or split[0] < best[0]):
                best = (split[0], int(f), split[1])
        if best is None:
            continue
        _, f, thr = best
        mask = X[idx, f] <= thr
        left_idx, right_idx = idx[mask], idx[~mask]
        feature[node], threshold[node] = f, thr
        left[node] = new_node(left_idx)
        right[node] = new_node(right_idx)
        stack.append((right[node], right_idx, depth + 1))
        stack.append((left[node], left_idx, depth + 1))

    return DecisionTree(
        np.array(feature, dtype=np.int64),
        np.array(threshold, dtype=np.float64),
        np.array(left, dtype=np.int64),
        np.array(right, dtype=np.int64),
        np.array(value, dtype=np.int64),
    )


@dataclass(frozen=True)
class ForestModel:
    trees: tuple[DecisionTree, ...]

    def predict(self, X: Array) -> IntArray:
        votes = np.zeros(len(X), dtype=np.int64)
        for tree in self.trees:
            votes += tree.predict(X)
        # An exact tie is a non-buggy prediction
        return (2 * votes > len(self.trees)).astype(np.int64)


def fit_forest(X: Array, y: IntArray, n_trees: int = 100, max_depth: int = 100, seed: int = 0) -> ForestModel:
    n, d = X.shape
    max_features = min(d, max(1, math.ceil(math.sqrt(d))))
    trees = []
    for t in range(n_trees):
        rng = tree_rng(seed, t)
        boot = rng.integers(0, n, size=n)
        trees.append(fit_tree(X[boot], y[boot], rng, max_depth, max_features))
    logger.debug(f"Random forest: {n_trees} tree(s), {max_features} candidate feature(s) per split")
    return ForestModel(tuple(trees))
