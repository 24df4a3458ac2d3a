"""Binary pairwise classifiers, cross-validation and feature ranking.

Two model kinds are supported: L2-regularized logistic regression fitted
by full-batch gradient descent, and a random forest of bagged CART trees
(Gini splits, sqrt(d) candidate features per split) whose probability is
the fraction of trees voting for a match.
"""
from __future__ import annotations

import concurrent.futures as cf
import itertools
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

MODEL_FORMAT = "linkforge-model"
MODEL_FORMAT_VERSION = 1

LOGREG_DEFAULTS = {"l2": 1e-3, "learning_rate": 0.5, "max_iter": 3000, "tol": 1e-10}
FOREST_DEFAULTS = {"n_trees": 100, "max_depth": 12, "min_leaf": 2}
FOREST_GRID = {"n_trees": [50, 100, 200], "max_depth": [8, 12, 16]}


class TrainingError(ValueError):
    pass


class SchemaMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class LabeledPair:
    features: Any  # FeatureVector or TitleFeatures
    label: int

    def __post_init__(self):
        if self.label not in (0, 1):
            raise ValueError(f"label must be 0 or 1, got {self.label!r}")


# -- logistic regression ----------------------------------------------------

def sigmoid(z):
    return np.exp(-np.logaddexp(0.0, -z))


def logistic_loss(w: np.ndarray, b: float, X: np.ndarray, y: np.ndarray, l2: float) -> float:
    """Mean log-loss plus ``l2/2 * ||w||^2`` (bias not penalized)."""
    z = X @ w + b
    return float(np.mean(np.logaddexp(0.0, z) - y * z) + 0.5 * l2 * (w @ w))


def logistic_grad(w: np.ndarray, b: float, X: np.ndarray, y: np.ndarray, l2: float) -> Tuple[np.ndarray, float]:
    err = sigmoid(X @ w + b) - y
    return X.T @ err / len(y) + l2 * w, float(np.mean(err))


@dataclass
class LogisticRegression:
    weights: np.ndarray
    bias: float
    mean: np.ndarray
    scale: np.ndarray

    @classmethod
    def fit(cls, X, y, l2=1e-3, learning_rate=0.5, max_iter=3000, tol=1e-10) -> "LogisticRegression":
        mean = X.mean(axis=0)
        scale = X.std(axis=0)
        scale[scale == 0] = 1.0
        Z = (X - mean) / scale
        w = np.zeros(X.shape[1])
        b = 0.0
        prev = math.inf
        for _ in range(int(max_iter)):
            gw, gb = logistic_grad(w, b, Z, y, l2)
            w -= learning_rate * gw
            b -= learning_rate * gb
            loss = logistic_loss(w, b, Z, y, l2)
            if prev - loss < tol:
                break
            prev = loss
        return cls(w, b, mean, scale)

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return sigmoid(((X - self.mean) / self.scale) @ self.weights + self.bias)

    def to_dict(self) -> dict:
        return {"weights": self.weights.tolist(), "bias": self.bias,
                "mean": self.mean.tolist(), "scale": self.scale.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "LogisticRegression":
        return cls(np.asarray(d["weights"], float), float(d["bias"]),
                   np.asarray(d["mean"], float), np.asarray(d["scale"], float))


# -- CART trees and forest ---------------------------------------------------

@dataclass
class DecisionTree:
    """Flat-array binary tree; ``feature == -1`` marks a leaf."""
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray  # fraction of positives reaching the node

    def leaf_values(self, X: np.ndarray) -> np.ndarray:
        node = np.zeros(len(X), dtype=np.int64)
        rows = np.arange(len(X))
        while True:
            feat = self.feature[node]
            internal = feat >= 0
            if not internal.any():
                return self.value[node]
            go_left = X[rows, np.where(internal, feat, 0)] <= self.threshold[node]
            nxt = np.where(go_left, self.left[node], self.right[node])
            node = np.where(internal, nxt, node)

    def vote(self, X: np.ndarray) -> np.ndarray:
        return (self.leaf_values(X) > 0.5).astype(np.int64)

    def to_dict(self) -> dict:
        return {k: getattr(self, k).tolist() for k in ("feature", "threshold", "left", "right", "value")}

    @classmethod
    def from_dict(cls, d: dict) -> "DecisionTree":
        return cls(np.asarray(d["feature"], np.int64), np.asarray(d["threshold"], float),
                   np.asarray(d["left"], np.int64), np.asarray(d["right"], np.int64),
                   np.asarray(d["value"], float))


def gini(pos: np.ndarray, n: np.ndarray) -> np.ndarray:
    p = pos / n
    return 1.0 - p * p - (1.0 - p) * (1.0 - p)


def _best_split(x: np.ndarray, y: np.ndarray, min_leaf: int):
    order = np.argsort(x, kind="stable")
    xs, ys = x[order], y[order]
    n = len(xs)
    n_left = np.arange(1, n)
    pos_left = np.cumsum(ys)[:-1]
    pos_right = ys.sum() - pos_left
    n_right = n - n_left
    valid = (xs[:-1] < xs[1:]) & (n_left >= min_leaf) & (n_right >= min_leaf)
    if not valid.any():
        return None
    impurity = (n_left * gini(pos_left, n_left) + n_right * gini(pos_right, n_right)) / n
    impurity = np.where(valid, impurity, np.inf)
    i = int(np.argmin(impurity))
    return impurity[i], 0.5 * (xs[i] + xs[i + 1])


def grow_tree(X: np.ndarray, y: np.ndarray, rng: np.random.Generator, max_depth: int = 12,
              min_leaf: int = 2, max_features: Optional[int] = None) -> DecisionTree:
    n_feat = X.shape[1]
    mtry = max_features or max(1, int(math.sqrt(n_feat)))
    feature, threshold, left, right, value = [], [], [], [], []

    def new_node(idx):
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(float(y[idx].mean()))
        return len(feature) - 1

    root = new_node(np.arange(len(y)))
    stack = [(root, np.arange(len(y)), 0)]
    while stack:
        node, idx, depth = stack.pop()
        ys = y[idx]
        if depth >= max_depth or len(idx) < 2 * min_leaf or ys.min() == ys.max():
            continue
        best = None
        tried = 0
        # like common CART implementations, keep drawing features past
        # mtry only while no valid split has been found
        for f in rng.permutation(n_feat):
            if tried >= mtry and best is not None:
                break
            tried += 1
            found = _best_split(X[idx, f], ys, min_leaf)
            if found is not None and (best is None or found[0] < best[0]):
                best = (found[0], found[1], int(f))
        if best is None:
            continue
        _, thr, f = best
        mask = X[idx, f] <= thr
        li, ri = idx[mask], idx[~mask]
        feature[node], threshold[node] = f, thr
        left[node] = new_node(li)
        right[node] = new_node(ri)
        stack.append((right[node], ri, depth + 1))
        stack.append((left[node], li, depth + 1))
    return DecisionTree(np.asarray(feature, np.int64), np.asarray(threshold, float),
                        np.asarray(left, np.int64), np.asarray(right, np.int64),
                        np.asarray(value, float))


def _fit_one_tree(args):
    X, y, seed_seq, max_depth, min_leaf = args
    rng = np.random.default_rng(seed_seq)
    sample = rng.integers(0, len(y), size=len(y))
    return grow_tree(X[sample], y[sample], rng, max_depth=max_depth, min_leaf=min_leaf)


@dataclass
class RandomForest:
    trees: List[DecisionTree]
    _stacked: Optional[DecisionTree] = field(default=None, init=False, repr=False, compare=False)

    def _stack(self) -> DecisionTree:
        """All trees as one flat array with child pointers shifted by tree offsets."""
        if self._stacked is None:
            offsets = np.cumsum([0] + [len(t.feature) for t in self.trees[:-1]])
            shift = lambda arr, off: np.where(arr >= 0, arr + off, -1)
            self._stacked = DecisionTree(
                np.concatenate([t.feature for t in self.trees]),
                np.concatenate([t.threshold for t in self.trees]),
                np.concatenate([shift(t.left, o) for t, o in zip(self.trees, offsets)]),
                np.concatenate([shift(t.right, o) for t, o in zip(self.trees, offsets)]),
                np.concatenate([t.value for t in self.trees]),
            )
            self._roots = offsets
        return self._stacked

    @classmethod
    def fit(cls, X, y, n_trees=100, max_depth=12, min_leaf=2, seed=0, workers=1) -> "RandomForest":
        # per-tree seeds are spawned from the master seed, so the worker
        # count cannot change the result
        seeds = np.random.SeedSequence(seed).spawn(int(n_trees))
        jobs = [(X, y, s, int(max_depth), int(min_leaf)) for s in seeds]
        if workers > 1:
            with cf.ProcessPoolExecutor(max_workers=workers) as pool:
                trees = list(pool.map(_fit_one_tree, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
        else:
            trees = [_fit_one_tree(j) for j in jobs]
        return cls(trees)

    def votes(self, X: np.ndarray) -> np.ndarray:
        """Per-tree 0/1 votes, shape ``(n_trees, n_rows)``; all trees walk in lockstep."""
        st = self._stack()
        node = np.repeat(self._roots[:, None], len(X), axis=1)
        cols = np.broadcast_to(np.arange(len(X)), node.shape)
        while True:
            feat = st.feature[node]
            internal = feat >= 0
            if not internal.any():
                break
            go_left = X[cols, np.where(internal, feat, 0)] <= st.threshold[node]
            node = np.where(internal, np.where(go_left, st.left[node], st.right[node]), node)
        return (st.value[node] > 0.5).astype(np.int64)

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return self.votes(X).mean(axis=0)

    def to_dict(self) -> dict:
        return {"trees": [t.to_dict() for t in self.trees]}

    @classmethod
    def from_dict(cls, d: dict) -> "RandomForest":
        return cls([DecisionTree.from_dict(t) for t in d["trees"]])


_ESTIMATORS = {"logreg": LogisticRegression, "forest": RandomForest}


# -- model wrapper -----------------------------------------------------------

@dataclass
class Model:
    kind: str
    estimator: Union[LogisticRegression, RandomForest]
    feature_schema_version: int
    feature_names: Tuple[str, ...]
    decision_threshold: float = 0.5
    seed: int = 0
    hyperparams: Dict[str, Any] = field(default_factory=dict)

    def check_schema(self, names: Sequence[str], version: int) -> None:
        if version != self.feature_schema_version or tuple(names) != self.feature_names:
            raise SchemaMismatchError(
                f"model expects feature schema v{self.feature_schema_version} "
                f"{self.feature_names}, got v{version} {tuple(names)}")

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != len(self.feature_names):
            raise SchemaMismatchError(f"expected {len(self.feature_names)} features, got {X.shape[1]}")
        return self.estimator.predict_proba(X)

    def predict_labels(self, X: np.ndarray) -> np.ndarray:
        return (self.predict_proba(X) >= self.decision_threshold).astype(np.int64)

    def score_vectors(self, vectors: Sequence) -> np.ndarray:
        """Probabilities for feature objects, after a schema check."""
        if not vectors:
            return np.empty(0)
        v0 = vectors[0]
        self.check_schema(v0.names, v0.schema_version)
        return self.predict_proba(np.vstack([v.as_array() for v in vectors]))

    def to_dict(self) -> dict:
        return {
            "format": MODEL_FORMAT,
            "format_version": MODEL_FORMAT_VERSION,
            "kind": self.kind,
            "feature_schema_version": self.feature_schema_version,
            "feature_names": list(self.feature_names),
            "decision_threshold": self.decision_threshold,
            "seed": self.seed,
            "hyperparams": self.hyperparams,
            "params": self.estimator.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "Model":
        if d.get("format") != MODEL_FORMAT or d.get("format_version") != MODEL_FORMAT_VERSION:
            raise ValueError("not a linkforge model file (or unsupported version)")
        return cls(
            kind=d["kind"],
            estimator=_ESTIMATORS[d["kind"]].from_dict(d["params"]),
            feature_schema_version=int(d["feature_schema_version"]),
            feature_names=tuple(d["feature_names"]),
            decision_threshold=float(d["decision_threshold"]),
            seed=int(d["seed"]),
            hyperparams=dict(d["hyperparams"]),
        )

    def save(self, path: Union[str, Path]) -> None:
        Path(path).write_text(json.dumps(self.to_dict()), encoding="utf-8")

    @classmethod
    def load(cls, path: Union[str, Path]) -> "Model":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def predict(model: Model, v) -> Tuple[int, float]:
    """Classify one feature object; label is 1 iff probability >= threshold."""
    p = float(model.score_vectors([v])[0])
    return int(p >= model.decision_threshold), p


def _as_arrays(data: Sequence[LabeledPair]):
    if not data:
        raise TrainingError("no training data")
    v0 = data[0].features
    for pair in data:
        if pair.features.schema_version != v0.schema_version:
            raise TrainingError("training vectors mix feature schema versions")
    X = np.vstack([p.features.as_array() for p in data])
    y = np.asarray([p.label for p in data], dtype=float)
    return X, y, tuple(v0.names), v0.schema_version


def fit_arrays(X: np.ndarray, y: np.ndarray, kind: str, hyperparams: Optional[Mapping] = None,
               seed: int = 0, workers: int = 1, feature_names: Sequence[str] = (),
               schema_version: int = 0, decision_threshold: float = 0.5) -> Model:
    if len(y) == 0:
        raise TrainingError("no training data")
    if len(np.unique(y)) < 2:
        raise TrainingError("training data contains a single class")
    if kind == "logreg":
        hp = {**LOGREG_DEFAULTS, **(hyperparams or {})}
        est = LogisticRegression.fit(X, y, **hp)
    elif kind == "forest":
        hp = {**FOREST_DEFAULTS, **(hyperparams or {})}
        est = RandomForest.fit(X, y, seed=seed, workers=workers, **hp)
    else:
        raise ValueError(f"unknown model kind {kind!r}")
    names = tuple(feature_names) or tuple(f"f{i}" for i in range(X.shape[1]))
    return Model(kind, est, schema_version, names, decision_threshold, seed, hp)


def train(data: Sequence[LabeledPair], kind: str = "forest", hyperparams: Optional[Mapping] = None,
          seed: int = 0, workers: int = 1, decision_threshold: float = 0.5) -> Model:
    X, y, names, version = _as_arrays(data)
    return fit_arrays(X, y, kind, hyperparams, seed, workers, names, version, decision_threshold)


# -- evaluation ---------------------------------------------------------------

def precision_recall_f1(y_true, y_pred) -> Tuple[float, float, float]:
    """Binary P/R/F1; precision with no positive predictions is 1.0."""
    y_true = np.asarray(y_true).astype(bool)
    y_pred = np.asarray(y_pred).astype(bool)
    tp = int(np.sum(y_true & y_pred))
    fp = int(np.sum(~y_true & y_pred))
    fn = int(np.sum(y_true & ~y_pred))
    return prf_from_counts(tp, fp, fn)


def prf_from_counts(tp: int, fp: int, fn: int) -> Tuple[float, float, float]:
    precision = tp / (tp + fp) if tp + fp else 1.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


@dataclass(frozen=True)
class FoldMetrics:
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class CVReport:
    folds: Tuple[FoldMetrics, ...]
    pooled: FoldMetrics  # computed on all out-of-fold predictions together

    @property
    def k(self) -> int:
        return len(self.folds)

    @property
    def mean_precision(self) -> float:
        return float(np.mean([f.precision for f in self.folds]))

    @property
    def mean_recall(self) -> float:
        return float(np.mean([f.recall for f in self.folds]))

    @property
    def mean_f1(self) -> float:
        return float(np.mean([f.f1 for f in self.folds]))

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "mean": {"precision": self.mean_precision, "recall": self.mean_recall, "f1": self.mean_f1},
            "pooled": vars(self.pooled),
            "folds": [vars(f) for f in self.folds],
        }


def stratified_folds(y: np.ndarray, k: int, seed: int = 0) -> np.ndarray:
    """Fold number for each sample, with classes spread evenly over folds."""
    rng = np.random.default_rng(seed)
    fold = np.empty(len(y), dtype=np.int64)
    offset = 0
    for cls in np.unique(y):
        idx = rng.permutation(np.flatnonzero(y == cls))
        fold[idx] = (np.arange(len(idx)) + offset) % k
        offset += len(idx)
    return fold


def cross_validate(data: Sequence[LabeledPair], kind: str = "forest", hyperparams: Optional[Mapping] = None,
                   k: int = 10, seed: int = 0, workers: int = 1) -> CVReport:
    X, y, names, version = _as_arrays(data)
    return cross_validate_arrays(X, y, kind, hyperparams, k, seed, workers, names, version)


def cross_validate_arrays(X, y, kind, hyperparams=None, k=10, seed=0, workers=1,
                          feature_names=(), schema_version=0) -> CVReport:
    if k < 2:
        raise TrainingError("need at least 2 folds")
    if len(y) < k:
        raise TrainingError(f"{len(y)} samples cannot fill {k} folds")
    fold = stratified_folds(y, k, seed)
    oof = np.zeros(len(y), dtype=np.int64)
    metrics = []
    for i in range(k):
        test = fold == i
        model = fit_arrays(X[~test], y[~test], kind, hyperparams, seed, workers,
                           feature_names, schema_version)
        pred = model.predict_labels(X[test])
        oof[test] = pred
        metrics.append(FoldMetrics(*precision_recall_f1(y[test], pred)))
    return CVReport(tuple(metrics), FoldMetrics(*precision_recall_f1(y, oof)))


def expand_grid(grid: Union[Mapping[str, Sequence], Iterable[Mapping]]) -> List[Dict[str, Any]]:
    """Lattice points in order; a mapping of lists expands as a product."""
    if isinstance(grid, Mapping):
        keys = list(grid)
        return [dict(zip(keys, vals)) for vals in itertools.product(*(grid[k] for k in keys))]
    return [dict(p) for p in grid]


def grid_search(data: Sequence[LabeledPair], kind: str, grid, k: int = 10, seed: int = 0,
                workers: int = 1) -> Tuple[Dict[str, Any], CVReport]:
    """Lattice point with the best mean CV F1; the earliest point wins ties."""
    points = expand_grid(grid)
    if not points:
        raise ValueError("empty hyperparameter grid")
    best = None
    for hp in points:
        report = cross_validate(data, kind, hp, k, seed, workers)
        if best is None or report.mean_f1 > best[1].mean_f1:
            best = (hp, report)
    return best


def entropy(y: np.ndarray) -> float:
    if len(y) == 0:
        return 0.0
    p = np.bincount(y.astype(np.int64), minlength=2) / len(y)
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


def discretize(x: np.ndarray, bins: int = 10) -> np.ndarray:
    """Equal-frequency bins; features with few distinct values keep them."""
    values = np.unique(x)
    if len(values) <= bins:
        return np.searchsorted(values, x)
    edges = np.unique(np.quantile(x, np.arange(1, bins) / bins))
    return np.searchsorted(edges, x, side="right")


def information_gain(data: Sequence[LabeledPair], bins: int = 10) -> List[Tuple[str, float]]:
    X, y, names, _ = _as_arrays(data)
    return information_gain_arrays(X, y, names, bins)


def information_gain_arrays(X, y, names, bins: int = 10) -> List[Tuple[str, float]]:
    base = entropy(y)
    out = []
    for j, name in enumerate(names):
        b = discretize(X[:, j], bins)
        cond = 0.0
        for v in np.unique(b):
            mask = b == v
            cond += mask.mean() * entropy(y[mask])
        out.append((name, max(0.0, base - cond)))
    out.sort(key=lambda t: -t[1])
    return out
