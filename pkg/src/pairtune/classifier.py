"""Comparison classifiers over induced pair vectors.

Three interchangeable kinds share one interface: a gradient-boosted tree
ensemble (the default), a single CART tree, and L2 logistic regression.
A trained classifier also keeps the pivot, the best sample it was trained
on, which later serves as the anchor for finding winners.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import minimize
from scipy.special import expit

from ._io import atomic_write_text
from .errors import DegenerateTrainingError, DimensionError, ModelFormatError
from .induction import PairSet, build_training_set, induce_pair, is_self_pair
from .trees import Tree, grow_tree

GBT = "gradient-boosted-trees"
DECISION_TREE = "decision-tree"
LOGISTIC = "logistic-regression"
KINDS = (GBT, DECISION_TREE, LOGISTIC)

MODEL_MAGIC = "pairtune-comparison-model"
MODEL_VERSION = 1


@dataclass(frozen=True)
class GbtHyperParams:
    tree_count: int = 100
    max_depth: int = 6
    learning_rate: float = 0.3
    min_leaf_samples: int = 1
    reg_lambda: float = 1.0
    min_child_weight: float = 0.0

    def __post_init__(self):
        if self.tree_count < 1 or self.max_depth < 1 or self.min_leaf_samples < 1:
            raise ValueError("tree_count, max_depth and min_leaf_samples must be positive")
        if not 0.0 < self.learning_rate <= 1.0:
            raise ValueError("learning_rate must lie in (0, 1]")
        if self.reg_lambda < 0:
            raise ValueError("reg_lambda must be non-negative")


class BoostedTrees:
    """Logistic-loss gradient boosting with Newton leaf values."""

    kind = GBT

    def __init__(self, trees=(), base_margin: float = 0.0):
        self.trees = list(trees)
        self.base_margin = base_margin

    @classmethod
    def fit(cls, X, y, hyper: GbtHyperParams):
        y = y.astype(float)
        model = cls()
        margin = np.full(X.shape[0], model.base_margin)
        for _ in range(hyper.tree_count):
            p = expit(margin)
            tree = grow_tree(X, p - y, p * (1.0 - p), max_depth=hyper.max_depth,
                             min_leaf=hyper.min_leaf_samples, reg_lambda=hyper.reg_lambda,
                             min_child_weight=hyper.min_child_weight, scale=hyper.learning_rate)
            model.trees.append(tree)
            margin += tree.predict(X)
        return model

    def _packed(self):
        # all trees as padded (tree, node) arrays, walked together level by level
        if getattr(self, "_pack", None) is None:
            width = max(t.feature.shape[0] for t in self.trees)

            def pad(name, fill):
                out = np.full((len(self.trees), width), fill, dtype=getattr(self.trees[0], name).dtype)
                for k, t in enumerate(self.trees):
                    col = getattr(t, name)
                    out[k, :col.shape[0]] = col
                return out

            self._pack = (pad("feature", -1), pad("threshold", 0.0), pad("left", 0),
                          pad("right", 0), pad("value", 0.0), max(t.depth for t in self.trees))
        return self._pack

    def score(self, X):
        margin = np.full(X.shape[0], self.base_margin)
        if X.shape[0] >= 1000:
            # large batches are cheaper one tree at a time
            for tree in self.trees:
                margin += tree.predict(X)
            return expit(margin)
        if not self.trees:
            return expit(margin)
        feature, threshold, left, right, value, depth = self._packed()
        rows = np.arange(len(self.trees))[:, None]
        node = np.zeros((len(self.trees), X.shape[0]), dtype=np.int64)
        for _ in range(depth):
            feat = feature[rows, node]
            internal = feat >= 0
            if not internal.any():
                break
            x = X[np.arange(X.shape[0])[None, :], np.maximum(feat, 0)]
            child = np.where(x < threshold[rows, node], left[rows, node], right[rows, node])
            node = np.where(internal, child, node)
        # summing in tree order keeps results identical to per-tree accumulation
        for k in range(len(self.trees)):
            margin += value[k, node[k]]
        return expit(margin)

    def state(self) -> dict:
        return {"base_margin": self.base_margin, "trees": [t.to_dict() for t in self.trees]}

    @classmethod
    def from_state(cls, state):
        return cls([Tree.from_dict(t) for t in state["trees"]], float(state["base_margin"]))


class SingleTree:
    """CART tree on 0/1 labels; leaves hold the fraction of positive labels."""

    kind = DECISION_TREE

    def __init__(self, tree: Tree):
        self.tree = tree

    @classmethod
    def fit(cls, X, y, hyper: GbtHyperParams):
        # unit hessians with zero regularization give variance (Gini) reduction
        y = y.astype(float)
        return cls(grow_tree(X, -y, np.ones_like(y), max_depth=64,
                             min_leaf=hyper.min_leaf_samples, reg_lambda=0.0))

    def score(self, X):
        return self.tree.predict(X)

    def state(self) -> dict:
        return {"tree": self.tree.to_dict()}

    @classmethod
    def from_state(cls, state):
        return cls(Tree.from_dict(state["tree"]))


class Logistic:
    """Logistic regression, L2 penalty ``0.5 * |w|^2`` on the weights only."""

    kind = LOGISTIC

    def __init__(self, coef, intercept: float):
        self.coef = np.asarray(coef, dtype=float)
        self.intercept = float(intercept)

    @classmethod
    def fit(cls, X, y, hyper: GbtHyperParams):
        y = y.astype(float)
        d = X.shape[1]

        def loss(theta):
            w, b = theta[:d], theta[d]
            z = X @ w + b
            p = expit(z)
            value = np.sum(np.logaddexp(0.0, z) - y * z) + 0.5 * w @ w
            r = p - y
            return value, np.concatenate([X.T @ r + w, [r.sum()]])

        res = minimize(loss, np.zeros(d + 1), jac=True, method="L-BFGS-B",
                       options={"maxiter": 1000})
        return cls(res.x[:d], res.x[d])

    def score(self, X):
        return expit(X @ self.coef + self.intercept)

    def state(self) -> dict:
        return {"coef": self.coef.tolist(), "intercept": self.intercept}

    @classmethod
    def from_state(cls, state):
        return cls(state["coef"], state["intercept"])


_MODELS = {GBT: BoostedTrees, DECISION_TREE: SingleTree, LOGISTIC: Logistic}


@dataclass
class Pivot:
    """Best training sample: normalized coordinates and its score."""

    coords: np.ndarray
    score: float
    index: int

    def __eq__(self, other):
        if not isinstance(other, Pivot):
            return NotImplemented
        return (np.array_equal(self.coords, other.coords) and self.score == other.score
                and self.index == other.index)


@dataclass(eq=False)
class ComparisonClassifier:
    kind: str
    model: object
    dimension: int
    hyper: GbtHyperParams = field(default_factory=GbtHyperParams)
    threshold: float = 0.5
    pivot: Pivot | None = None
    train_accuracy: float = float("nan")
    seed: int = 0

    def scores(self, V) -> np.ndarray:
        V = np.atleast_2d(np.asarray(V, dtype=float))
        if V.shape[1] != self.dimension:
            raise DimensionError(f"classifier expects {self.dimension} features, got {V.shape[1]}")
        return self.model.score(V)

    def predict(self, V):
        """Label 1 where the first setting of the induced pair is predicted to win.

        Pairs of a setting with itself are labeled 0 whatever the model says.

        A single vector gives an int, a stack of vectors an int8 array.
        """
        labels = (self.scores(V) > self.threshold).astype(np.int8)
        # identical settings are never a strict win; training has no such pairs
        labels[is_self_pair(V)] = 0
        return int(labels[0]) if np.ndim(V) == 1 else labels

    def save(self, path) -> None:
        save_model(self, path)


def train(pairs: PairSet, kind: str = GBT, hyper: GbtHyperParams | None = None,
          seed: int = 0, pivot: Pivot | None = None) -> ComparisonClassifier:
    """Fit a comparison classifier on induced pairs.

    Training is deterministic; ``seed`` is recorded with the model.

    :raises DegenerateTrainingError: if the pairs carry a single label class.
    """
    if kind not in _MODELS:
        raise ValueError(f"unknown classifier kind {kind!r}")
    hyper = hyper or GbtHyperParams()
    if len(pairs) < 2 or np.unique(pairs.labels).size < 2:
        raise DegenerateTrainingError("comparison data holds a single label class")
    model = _MODELS[kind].fit(pairs.inputs, pairs.labels, hyper)
    clf = ComparisonClassifier(kind, model, pairs.inputs.shape[1], hyper, pivot=pivot, seed=seed)
    clf.train_accuracy = float(np.mean(clf.predict(pairs.inputs) == pairs.labels))
    return clf


def fit_samples(settings, performance, kind: str = GBT, hyper: GbtHyperParams | None = None,
                seed: int = 0, extra: PairSet | None = None) -> ComparisonClassifier:
    """Induce all ordered pairs from samples, train, and attach the pivot.

    :param settings: normalized settings, shape ``(n, d)``.
    :param performance: scores to maximize.
    :param extra: additional labeled pairs, e.g. from experience rules.
    """
    settings = np.asarray(settings, dtype=float)
    performance = np.asarray(performance, dtype=float)
    pairs = build_training_set(settings, performance)
    if extra is not None and len(extra):
        pairs = pairs + extra
    best = int(np.argmax(performance))
    pivot = Pivot(settings[best].copy(), float(performance[best]), best)
    return train(pairs, kind, hyper, seed, pivot)


def winner_recall(clf: ComparisonClassifier, winners, pivot) -> float:
    """Fraction of known winners the classifier predicts to beat ``pivot``."""
    winners = np.atleast_2d(np.asarray(winners, dtype=float))
    if winners.shape[0] == 0 or winners.size == 0:
        raise ValueError("winner_recall needs at least one winner")
    return float(np.mean(clf.predict(induce_pair(winners, pivot)) == 1))


def save_model(clf: ComparisonClassifier, path) -> None:
    doc = {
        "magic": MODEL_MAGIC,
        "version": MODEL_VERSION,
        "kind": clf.kind,
        "dimension": clf.dimension,
        "threshold": clf.threshold,
        "hyper": asdict(clf.hyper),
        "seed": clf.seed,
        "train_accuracy": clf.train_accuracy,
        "pivot": None if clf.pivot is None else {
            "coords": clf.pivot.coords.tolist(),
            "score": clf.pivot.score,
            "index": clf.pivot.index,
        },
        "state": clf.model.state(),
    }
    atomic_write_text(path, json.dumps(doc))


def load_model(path) -> ComparisonClassifier:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise ModelFormatError(f"cannot read model {path}: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("magic") != MODEL_MAGIC:
        raise ModelFormatError(f"{path} is not a comparison model file")
    if doc.get("version") != MODEL_VERSION:
        raise ModelFormatError(f"unsupported model version {doc.get('version')!r}")
    try:
        model = _MODELS[doc["kind"]].from_state(doc["state"])
        pivot = doc["pivot"]
        if pivot is not None:
            pivot = Pivot(np.asarray(pivot["coords"], dtype=float), float(pivot["score"]),
                          int(pivot["index"]))
        return ComparisonClassifier(
            kind=doc["kind"], model=model, dimension=int(doc["dimension"]),
            hyper=GbtHyperParams(**doc["hyper"]), threshold=float(doc["threshold"]),
            pivot=pivot, train_accuracy=float(doc["train_accuracy"]), seed=int(doc["seed"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"corrupt model file {path}: {exc}") from exc

