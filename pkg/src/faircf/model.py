"""Binary classifiers behind one prediction interface.

Every model exposes ``score(x)`` (estimated probability of class 1) and
``predict(x)``, with ``predict(x) == 1`` exactly when ``score(x) >= 0.5``.
The counterfactual code only ever talks to that interface.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .data import Dataset, Standardizer
from .errors import ConfigError, DimensionMismatch, EmptyDataset, SingleClassData, TooFewSamples

MODEL_FORMAT = "faircf-model"
MODEL_VERSION = 1


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.1
    epochs: int = 500
    max_depth: int = 8
    min_leaf: int = 5
    var_floor: float = 1e-9
    seed: int = 0

    def validate(self) -> None:
        if self.max_depth < 1:
            raise ConfigError(f"max_depth must be >= 1, got {self.max_depth}")
        if self.min_leaf < 1:
            raise ConfigError(f"min_leaf must be >= 1, got {self.min_leaf}")
        if self.epochs < 0 or not self.learning_rate > 0:
            raise ConfigError("epochs must be >= 0 and learning_rate > 0")
        if not self.var_floor > 0:
            raise ConfigError("var_floor must be > 0")


class PredictionModel:
    """Interface shared by all classifiers. Subclasses implement ``score_many``."""

    kind = "abstract"
    dim: int

    def score_many(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def score(self, x) -> float:
        x = np.asarray(x, dtype=float).reshape(1, -1)
        return float(self.score_many(x)[0])

    def predict(self, x) -> int:
        return int(self.score(x) >= 0.5)

    def predict_many(self, X) -> np.ndarray:
        return (self.score_many(X) >= 0.5).astype(int)

    def _check(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X.reshape(1, -1)
        if X.shape[1] != self.dim:
            raise DimensionMismatch(f"model expects {self.dim} features, got {X.shape[1]}")
        return X

    def params(self) -> dict:
        raise NotImplementedError


def _sigmoid(t):
    return 1.0 / (1.0 + np.exp(-np.clip(t, -500, 500)))


@dataclass(frozen=True, eq=False)
class LogisticModel(PredictionModel):
    weights: np.ndarray
    bias: float

    kind = "logreg"

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "bias", float(self.bias))

    @property
    def dim(self) -> int:
        return len(self.weights)

    def score_many(self, X) -> np.ndarray:
        return _sigmoid(self._check(X) @ self.weights + self.bias)

    def score(self, x) -> float:
        # hot path inside the simplex solver
        x = np.asarray(x, dtype=float)
        if x.shape != self.weights.shape:
            raise DimensionMismatch(f"model expects {self.dim} features, got {x.size}")
        t = float(x @ self.weights) + self.bias
        if t >= 0:
            return 1.0 / (1.0 + math.exp(-t))
        e = math.exp(t)
        return e / (1.0 + e)

    def params(self) -> dict:
        return {"weights": [float(v) for v in self.weights], "bias": self.bias}


@dataclass(frozen=True, eq=False)
class TreeModel(PredictionModel):
    """Flat-array binary tree. Leaves have ``feature == -1``.

    Samples with ``x[feature] <= threshold`` go left.
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray  # Laplace-smoothed class-1 fraction per node
    n_samples: np.ndarray
    n_features: int

    kind = "dectree"

    def __post_init__(self):
        for name, dtype in (("feature", int), ("threshold", float), ("left", int), ("right", int),
                            ("value", float), ("n_samples", int)):
            arr = np.asarray(getattr(self, name), dtype=dtype)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if np.any(self.feature >= self.n_features):
            raise DimensionMismatch("tree node refers to a feature beyond the model dimension")

    @property
    def dim(self) -> int:
        return self.n_features

    def _leaf(self, x) -> int:
        node = 0
        feature, threshold = self.feature, self.threshold
        while feature[node] >= 0:
            node = self.left[node] if x[feature[node]] <= threshold[node] else self.right[node]
        return node

    def score_many(self, X) -> np.ndarray:
        X = self._check(X)
        return np.array([self.value[self._leaf(x)] for x in X], dtype=float)

    def score(self, x) -> float:
        x = np.asarray(x, dtype=float).reshape(-1)
        if x.shape[0] != self.n_features:
            raise DimensionMismatch(f"model expects {self.n_features} features, got {x.shape[0]}")
        return float(self.value[self._leaf(x)])

    def leaves(self) -> np.ndarray:
        return np.flatnonzero(self.feature < 0)

    def depth(self) -> int:
        def walk(node):
            if self.feature[node] < 0:
                return 0
            return 1 + max(walk(self.left[node]), walk(self.right[node]))
        return walk(0)

    def params(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": [float(v) for v in self.threshold],
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": [float(v) for v in self.value],
            "n_samples": self.n_samples.tolist(),
            "n_features": self.n_features,
        }


@dataclass(frozen=True, eq=False)
class GaussianNBModel(PredictionModel):
    priors: np.ndarray  # shape (2,)
    means: np.ndarray  # shape (2, d)
    variances: np.ndarray  # shape (2, d)

    kind = "gnb"

    def __post_init__(self):
        for name in ("priors", "means", "variances"):
            arr = np.asarray(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def dim(self) -> int:
        return self.means.shape[1]

    def _log_joint(self, X) -> np.ndarray:
        X = self._check(X)
        out = np.empty((X.shape[0], 2))
        for c in (0, 1):
            var = self.variances[c]
            ll = -0.5 * np.sum(np.log(2 * np.pi * var) + (X - self.means[c]) ** 2 / var, axis=1)
            out[:, c] = np.log(self.priors[c]) + ll
        return out

    def score_many(self, X) -> np.ndarray:
        lj = self._log_joint(X)
        # P(class 1) = sigmoid(log p1 - log p0); stays finite for huge log ratios
        return _sigmoid(lj[:, 1] - lj[:, 0])

    def params(self) -> dict:
        return {
            "priors": [float(v) for v in self.priors],
            "means": self.means.tolist(),
            "variances": self.variances.tolist(),
        }


def _check_training_data(data: Dataset) -> None:
    if data.n == 0:
        raise EmptyDataset("training data is empty")
    if len(np.unique(data.y)) < 2:
        raise SingleClassData(f"training data contains only class {int(data.y[0])}")


def log_loss(model: PredictionModel, data: Dataset) -> float:
    p = np.clip(model.score_many(data.X), 1e-15, 1 - 1e-15)
    return float(-np.mean(data.y * np.log(p) + (1 - data.y) * np.log(1 - p)))


def train_logreg(data: Dataset, config: TrainConfig | None = None) -> LogisticModel:
    """Full-batch gradient descent on the mean log-loss from zero weights."""
    config = config or TrainConfig()
    config.validate()
    _check_training_data(data)
    X, y = data.X, data.y.astype(float)
    n = len(y)
    w = np.zeros(data.d)
    b = 0.0
    for _ in range(config.epochs):
        residual = _sigmoid(X @ w + b) - y
        w -= config.learning_rate * (X.T @ residual) / n
        b -= config.learning_rate * residual.sum() / n
    return LogisticModel(w, b)


def _best_split(X: np.ndarray, y: np.ndarray, min_leaf: int):
    """Lowest weighted Gini split; ties go to the lowest feature, then threshold."""
    n, d = X.shape
    total_pos = y.sum()
    parent = 1.0 - (total_pos / n) ** 2 - (1 - total_pos / n) ** 2
    best = None  # (impurity, feature, threshold)
    for j in range(d):
        order = np.argsort(X[:, j], kind="stable")
        xs, ys = X[order, j], y[order]
        n_left = np.arange(1, n)
        pos_left = np.cumsum(ys)[:-1]
        pos_right = total_pos - pos_left
        n_right = n - n_left
        p_l = pos_left / n_left
        p_r = pos_right / n_right
        gini_l = 1.0 - p_l ** 2 - (1 - p_l) ** 2
        gini_r = 1.0 - p_r ** 2 - (1 - p_r) ** 2
        impurity = (n_left * gini_l + n_right * gini_r) / n
        ok = (xs[1:] > xs[:-1]) & (n_left >= min_leaf) & (n_right >= min_leaf)
        if not ok.any():
            continue
        impurity = np.where(ok, impurity, np.inf)
        i = int(np.argmin(impurity))
        if best is None or impurity[i] < best[0] - 1e-12:
            best = (float(impurity[i]), j, float((xs[i] + xs[i + 1]) / 2))
    if best is None or best[0] >= parent - 1e-12:
        return None
    return best[1], best[2]


def train_tree(data: Dataset, config: TrainConfig | None = None) -> TreeModel:
    """Greedy CART on Gini impurity with depth and leaf-size limits."""
    config = config or TrainConfig()
    config.validate()
    _check_training_data(data)
    feature, threshold, left, right, value, counts = [], [], [], [], [], []

    def new_node(y):
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append((y.sum() + 1.0) / (len(y) + 2.0))
        counts.append(len(y))
        return len(feature) - 1

    root = new_node(data.y)
    stack = [(root, np.arange(data.n), 0)]
    while stack:
        node, idx, depth = stack.pop()
        y = data.y[idx]
        if depth >= config.max_depth or y.min() == y.max() or len(idx) < 2 * config.min_leaf:
            continue
        split = _best_split(data.X[idx], y, config.min_leaf)
        if split is None:
            continue
        j, t = split
        mask = data.X[idx, j] <= t
        feature[node], threshold[node] = j, t
        li, ri = idx[mask], idx[~mask]
        left[node] = new_node(data.y[li])
        right[node] = new_node(data.y[ri])
        stack.append((right[node], ri, depth + 1))
        stack.append((left[node], li, depth + 1))
    return TreeModel(feature, threshold, left, right, value, counts, data.d)


def train_gnb(data: Dataset, config: TrainConfig | None = None) -> GaussianNBModel:
    config = config or TrainConfig()
    _check_training_data(data)
    priors, means, variances = [], [], []
    for c in (0, 1):
        Xc = data.X[data.y == c]
        if len(Xc) < 2:
            raise TooFewSamples(f"class {c} has {len(Xc)} samples; Gaussian naive Bayes needs >= 2")
        priors.append(len(Xc) / data.n)
        means.append(Xc.mean(axis=0))
        variances.append(np.maximum(Xc.var(axis=0), config.var_floor))
    return GaussianNBModel(np.array(priors), np.array(means), np.array(variances))


TRAINERS = {"logreg": train_logreg, "dectree": train_tree, "gnb": train_gnb}


def train(kind: str, data: Dataset, config: TrainConfig | None = None) -> PredictionModel:
    try:
        trainer = TRAINERS[kind]
    except KeyError:
        raise ConfigError(f"unknown classifier {kind!r}; choose from {sorted(TRAINERS)}") from None
    return trainer(data, config)


def accuracy(model: PredictionModel, data: Dataset) -> float:
    if data.n == 0:
        raise EmptyDataset("cannot compute accuracy on an empty dataset")
    return float(np.mean(model.predict_many(data.X) == data.y))


def model_to_dict(model: PredictionModel, standardizer: Standardizer | None = None) -> dict:
    doc = {"format": MODEL_FORMAT, "version": MODEL_VERSION, "kind": model.kind, "params": model.params()}
    if standardizer is not None:
        doc["standardizer"] = standardizer.to_dict()
    return doc


def model_from_dict(doc: dict) -> tuple[PredictionModel, Standardizer | None]:
    if doc.get("format") != MODEL_FORMAT:
        raise ConfigError("not a faircf model document")
    if doc.get("version") != MODEL_VERSION:
        raise ConfigError(f"unsupported model document version {doc.get('version')!r}")
    kind, p = doc["kind"], doc["params"]
    if kind == "logreg":
        model = LogisticModel(p["weights"], p["bias"])
    elif kind == "dectree":
        model = TreeModel(p["feature"], p["threshold"], p["left"], p["right"], p["value"],
                          p["n_samples"], p["n_features"])
    elif kind == "gnb":
        model = GaussianNBModel(p["priors"], p["means"], p["variances"])
    else:
        raise ConfigError(f"unknown model kind {kind!r}")
    std = doc.get("standardizer")
    return model, (Standardizer.from_dict(std) if std else None)


def save_model(path, model: PredictionModel, standardizer: Standardizer | None = None) -> None:
    Path(path).write_text(json.dumps(model_to_dict(model, standardizer), indent=2) + "\n", encoding="utf-8")


def load_model(path) -> tuple[PredictionModel, Standardizer | None]:
    return model_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
