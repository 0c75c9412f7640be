"""Second-order regression trees with exact greedy split finding.

Used both as boosting stages (logistic gradients) and, with unit hessians
and no regularization, as a plain CART tree on 0/1 labels.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class Tree:
    """Flat array form of a binary tree.

    ``feature[k] < 0`` marks node ``k`` as a leaf. Samples with
    ``x[feature] < threshold`` go to ``left``.
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    depth: int

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        rows = np.arange(X.shape[0])
        node = np.zeros(X.shape[0], dtype=np.int64)
        for _ in range(self.depth):
            feat = self.feature[node]
            internal = feat >= 0
            if not internal.any():
                break
            go_left = X[rows, np.maximum(feat, 0)] < self.threshold[node]
            child = np.where(go_left, self.left[node], self.right[node])
            node = np.where(internal, child, node)
        return self.value[node]

    def to_dict(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
            "depth": self.depth,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Tree":
        return cls(
            feature=np.asarray(doc["feature"], dtype=np.int64),
            threshold=np.asarray(doc["threshold"], dtype=float),
            left=np.asarray(doc["left"], dtype=np.int64),
            right=np.asarray(doc["right"], dtype=np.int64),
            value=np.asarray(doc["value"], dtype=float),
            depth=int(doc["depth"]),
        )


def _best_split(X, g, h, reg_lambda, min_leaf, min_child_weight=0.0):
    """Return ``(gain, feature, threshold)`` of the best split, or None.

    Ties in gain go to the lowest feature index, then the lowest threshold.
    """
    m = X.shape[0]
    order = np.argsort(X, axis=0, kind="stable")
    xs = np.take_along_axis(X, order, axis=0)
    GL = np.cumsum(g[order], axis=0)[:-1]
    HL = np.cumsum(h[order], axis=0)[:-1]
    G, H = g.sum(), h.sum()
    GR, HR = G - GL, H - HL
    with np.errstate(divide="ignore", invalid="ignore"):
        gain = GL**2 / (HL + reg_lambda) + GR**2 / (HR + reg_lambda) - G**2 / (H + reg_lambda)
    valid = xs[:-1] < xs[1:]
    left_count = np.arange(1, m)[:, None]
    valid &= (left_count >= min_leaf) & (m - left_count >= min_leaf)
    valid &= (HL >= min_child_weight) & (HR >= min_child_weight)
    gain = np.where(valid & np.isfinite(gain), gain, -np.inf)
    flat = gain.T.ravel()
    best = int(np.argmax(flat))
    if not flat[best] > 0.0:
        return None
    feature, pos = divmod(best, m - 1)
    lo, hi = xs[pos, feature], xs[pos + 1, feature]
    threshold = lo + (hi - lo) / 2
    if not lo < threshold <= hi:
        threshold = hi
    return 0.5 * flat[best], feature, threshold


def grow_tree(X, g, h, *, max_depth: int, min_leaf: int = 1, reg_lambda: float = 1.0,
              min_child_weight: float = 0.0, scale: float = 1.0) -> Tree:
    """Fit one tree to gradients ``g`` and hessians ``h``.

    Leaf values are ``-scale * G / (H + reg_lambda)``.
    """
    X = np.asarray(X, dtype=float)
    g = np.asarray(g, dtype=float)
    h = np.asarray(h, dtype=float)
    feature, threshold, left, right, value = [], [], [], [], []
    reached = 0

    def new_node():
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(0.0)
        return len(feature) - 1

    stack = [(new_node(), np.arange(X.shape[0]), 0)]
    while stack:
        node, idx, depth = stack.pop()
        reached = max(reached, depth)
        gi, hi = g[idx], h[idx]
        value[node] = -scale * gi.sum() / (hi.sum() + reg_lambda)
        if depth >= max_depth or idx.shape[0] < 2 * min_leaf:
            continue
        split = _best_split(X[idx], gi, hi, reg_lambda, min_leaf, min_child_weight)
        if split is None:
            continue
        _, feat, thr = split
        mask = X[idx, feat] < thr
        feature[node], threshold[node] = feat, thr
        left[node], right[node] = new_node(), new_node()
        # right pushed first so the left subtree gets lower node ids
        stack.append((right[node], idx[~mask], depth + 1))
        stack.append((left[node], idx[mask], depth + 1))
    return Tree(
        feature=np.asarray(feature, dtype=np.int64),
        threshold=np.asarray(threshold, dtype=float),
        left=np.asarray(left, dtype=np.int64),
        right=np.asarray(right, dtype=np.int64),
        value=np.asarray(value, dtype=float),
        depth=reached,
    )
