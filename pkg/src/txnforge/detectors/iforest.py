"""Isolation forest.

Each tree is grown on a subsample drawn without replacement. An internal node
picks a feature uniformly among those that are not constant on the node's
rows, then a split value uniformly in that feature's range; rows with
``x < split`` go left. Growth stops at a single row, at constant rows, or at
the depth limit ``ceil(log2(subsample_size))``. A point's path length is the
depth of the leaf it reaches plus ``c(leaf size)``, the expected path length
of an unbuilt subtree. The score is ``2 ** (-mean_path / c(subsample_size))``.

Exactly ``ceil(contamination * N)`` rows are flagged: the highest scores,
ties broken by lower row index. A constant matrix gives every row the same
score, so the flags are simply the first rows.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..errors import DataError, ParameterError
from ..rng import derive_seed, make_rng

EULER_GAMMA = 0.5772156649015329


def average_path_length(n: int) -> float:
    """``c(n)``: mean unsuccessful-search path length in a BST of n keys."""
    if n <= 1:
        return 0.0
    if n == 2:
        return 1.0
    return 2.0 * (math.log(n - 1) + EULER_GAMMA) - 2.0 * (n - 1) / n


def n_flagged(contamination: float, n: int) -> int:
    # guard against 0.1 * 1010 == 101.00000000000001
    return min(n, math.ceil(round(contamination * n, 9)))


@dataclass
class IsolationTree:
    """Flat array representation; ``feature == -1`` marks a leaf."""

    feature: list = field(default_factory=list)
    threshold: list = field(default_factory=list)
    left: list = field(default_factory=list)
    right: list = field(default_factory=list)
    size: list = field(default_factory=list)
    depth: list = field(default_factory=list)

    def _add(self, depth, size) -> int:
        for col, v in ((self.feature, -1), (self.threshold, 0.0), (self.left, -1), (self.right, -1)):
            col.append(v)
        self.size.append(size)
        self.depth.append(depth)
        return len(self.size) - 1

    @classmethod
    def grow(cls, X: np.ndarray, rng: np.random.Generator, max_depth: int) -> "IsolationTree":
        tree = cls()
        stack = [(np.arange(len(X)), 0, tree._add(0, len(X)))]
        while stack:
            rows, depth, node = stack.pop()
            if len(rows) <= 1 or depth >= max_depth:
                continue
            sub = X[rows]
            lo, hi = sub.min(axis=0), sub.max(axis=0)
            candidates = np.flatnonzero(hi > lo)
            if candidates.size == 0:
                continue
            f = int(candidates[rng.integers(candidates.size)])
            split = float(rng.uniform(lo[f], hi[f]))
            mask = sub[:, f] < split
            tree.feature[node] = f
            tree.threshold[node] = split
            li = tree._add(depth + 1, int(mask.sum()))
            ri = tree._add(depth + 1, int((~mask).sum()))
            tree.left[node], tree.right[node] = li, ri
            stack.append((rows[~mask], depth + 1, ri))
            stack.append((rows[mask], depth + 1, li))
        return tree

    def path_lengths(self, X: np.ndarray) -> np.ndarray:
        feature = np.asarray(self.feature)
        threshold = np.asarray(self.threshold)
        left, right = np.asarray(self.left), np.asarray(self.right)
        node = np.zeros(len(X), dtype=int)
        active = feature[node] >= 0
        while active.any():
            idx = np.flatnonzero(active)
            cur = node[idx]
            go_left = X[idx, feature[cur]] < threshold[cur]
            node[idx] = np.where(go_left, left[cur], right[cur])
            active = feature[node] >= 0
        depth = np.asarray(self.depth, dtype=float)
        leaf_c = np.array([average_path_length(s) for s in self.size])
        return depth[node] + leaf_c[node]


@dataclass
class IsolationForest:
    n_trees: int = 100
    subsample_size: int = 256
    contamination: float = 0.1
    seed: int = 0
    max_depth: Optional[int] = None  # None -> ceil(log2(subsample))

    trees: list = field(default_factory=list)
    sample_size_: int = 0

    def __post_init__(self):
        if not 0 < self.contamination <= 0.5:
            raise ParameterError(f"contamination must be in (0, 0.5], got {self.contamination}")
        if self.n_trees < 1 or self.subsample_size < 2:
            raise ParameterError("need n_trees >= 1 and subsample_size >= 2")

    def fit(self, X) -> "IsolationForest":
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        if len(X) < 2:
            raise DataError(f"isolation forest needs at least 2 rows, got {len(X)}")
        psi = min(self.subsample_size, len(X))
        depth = self.max_depth if self.max_depth is not None else math.ceil(math.log2(psi))
        self.sample_size_ = psi
        self.trees = []
        for i in range(self.n_trees):
            rng = make_rng(derive_seed(self.seed, i))
            rows = rng.choice(len(X), size=psi, replace=False)
            self.trees.append(IsolationTree.grow(X[rows], rng, depth))
        return self

    def mean_path_length(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        total = np.zeros(len(X))
        for tree in self.trees:
            total += tree.path_lengths(X)
        return total / len(self.trees)

    def score(self, X) -> np.ndarray:
        return 2.0 ** (-self.mean_path_length(X) / average_path_length(self.sample_size_))

    def flag(self, scores: np.ndarray) -> np.ndarray:
        k = n_flagged(self.contamination, len(scores))
        order = np.lexsort((np.arange(len(scores)), -scores))
        flags = np.zeros(len(scores), dtype=int)
        flags[order[:k]] = 1
        return flags


def iforest_fit_score(X, params: Optional[IsolationForest] = None):
    """Fit ``params`` (a configured, unfitted forest) on X; return ``(scores, flags, forest)``."""
    forest = params if params is not None else IsolationForest()
    forest.fit(X)
    scores = forest.score(X)
    return scores, forest.flag(scores), forest
