"""CART classification tree with Gini impurity.

Splits are found exhaustively: for every feature, candidate thresholds are the
midpoints between adjacent distinct sorted values, and a row goes left when
``x[feature] <= threshold``. Among equally good splits the lowest feature
index wins, then the lowest threshold. A node splits only if the weighted Gini
strictly drops.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..errors import DataError, ParameterError

_GAIN_EPS = 1e-12


@dataclass
class Node:
    depth: int
    counts: np.ndarray
    prediction: int
    feature: Optional[int] = None
    threshold: Optional[float] = None
    left: Optional["Node"] = None
    right: Optional["Node"] = None

    @property
    def is_leaf(self) -> bool:
        return self.feature is None


def _gini(counts: np.ndarray) -> np.ndarray:
    """Gini impurity along the last axis of a count array."""
    total = counts.sum(axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        p = counts / total[..., None]
    g = 1.0 - np.sum(p * p, axis=-1)
    return np.where(total > 0, g, 0.0)


def best_split(X: np.ndarray, y_idx: np.ndarray, n_classes: int):
    """Return ``(impurity_decrease, feature, threshold)`` of the best split, or None."""
    n = len(y_idx)
    parent = _gini(np.bincount(y_idx, minlength=n_classes).astype(float))
    onehot = np.eye(n_classes)[y_idx]
    best = None
    for f in range(X.shape[1]):
        order = np.argsort(X[:, f], kind="stable")
        xs = X[order, f]
        left = np.cumsum(onehot[order], axis=0)[:-1]
        cut = np.flatnonzero(xs[1:] > xs[:-1])
        if cut.size == 0:
            continue
        lc = left[cut]
        rc = left[-1] + onehot[order][-1] - lc
        nl = (cut + 1).astype(float)
        weighted = (nl * _gini(lc) + (n - nl) * _gini(rc)) / n
        gains = parent - weighted
        i = int(np.argmax(gains))  # first maximum = lowest threshold
        gain = float(gains[i])
        if best is None or gain > best[0] + _GAIN_EPS:
            thr = (xs[cut[i]] + xs[cut[i] + 1]) / 2.0
            best = (gain, f, float(thr))
    return best


class DecisionTree:
    def __init__(self, max_depth: int = 1):
        if max_depth < 1:
            raise ParameterError(f"max_depth must be >= 1, got {max_depth}")
        self.max_depth = max_depth
        self.root: Optional[Node] = None
        self.classes_: Optional[np.ndarray] = None

    def fit(self, X, y, seed: Optional[int] = None) -> "DecisionTree":
        # ``seed`` is accepted for interface parity; tie-breaking is deterministic
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        y = np.asarray(y)
        if len(X) == 0 or len(X) != len(y):
            raise DataError(f"X and y must be non-empty and aligned, got {len(X)} and {len(y)}")
        self.classes_, y_idx = np.unique(y, return_inverse=True)
        self.root = self._grow(X, y_idx, depth=0)
        return self

    def _grow(self, X, y_idx, depth) -> Node:
        k = len(self.classes_)
        counts = np.bincount(y_idx, minlength=k)
        node = Node(depth=depth, counts=counts, prediction=int(np.argmax(counts)))
        if depth >= self.max_depth or np.count_nonzero(counts) <= 1:
            return node
        split = best_split(X, y_idx, k)
        if split is None or split[0] <= _GAIN_EPS:
            return node
        _, f, thr = split
        mask = X[:, f] <= thr
        node.feature, node.threshold = f, thr
        node.left = self._grow(X[mask], y_idx[mask], depth + 1)
        node.right = self._grow(X[~mask], y_idx[~mask], depth + 1)
        return node

    def predict(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        out = np.empty(len(X), dtype=int)
        for i, row in enumerate(X):
            node = self.root
            while not node.is_leaf:
                node = node.left if row[node.feature] <= node.threshold else node.right
            out[i] = node.prediction
        return self.classes_[out]

    def internal_nodes(self) -> list[Node]:
        out, stack = [], [self.root]
        while stack:
            node = stack.pop()
            if node is not None and not node.is_leaf:
                out.append(node)
                stack.extend([node.right, node.left])
        return out

    def thresholds(self) -> list[float]:
        """Split thresholds in pre-order."""
        return [n.threshold for n in self.internal_nodes()]

    def n_leaves(self) -> int:
        return len(self.internal_nodes()) + 1


def dtree_fit(X, y, max_depth: int = 1, seed: Optional[int] = None) -> DecisionTree:
    return DecisionTree(max_depth=max_depth).fit(X, y, seed=seed)
