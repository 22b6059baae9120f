"""Datasets, standardization, stratified k-fold splitting and a synthetic
generator with a tunable group disparity."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import (
    ConfigError,
    DimensionMismatch,
    EmptyDataset,
    MissingColumn,
    NonBinaryLabel,
    NonNumericCell,
    TooFewSamples,
)


@dataclass(frozen=True)
class Dataset:
    """Feature matrix with binary labels and a binary protected attribute.

    The protected attribute lives in ``groups`` only; it is never one of the
    feature columns.
    """

    X: np.ndarray
    y: np.ndarray
    groups: np.ndarray
    feature_names: tuple[str, ...] = ()
    row_ids: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        if X.ndim == 1:
            X = X.reshape(-1, 1) if X.size else X.reshape(0, max(len(self.feature_names), 1))
        if X.ndim != 2:
            raise DimensionMismatch(f"feature matrix must be 2-D, got shape {X.shape}")
        n, d = X.shape
        y = np.asarray(self.y, dtype=int).reshape(-1)
        g = np.asarray(self.groups, dtype=int).reshape(-1)
        if len(y) != n or len(g) != n:
            raise DimensionMismatch(f"{n} rows but {len(y)} labels and {len(g)} group ids")
        if not np.all(np.isfinite(X)):
            raise ValueError("feature matrix contains NaN or Inf")
        if np.any((y != 0) & (y != 1)):
            raise NonBinaryLabel("labels must be 0 or 1")
        if np.any((g != 0) & (g != 1)):
            raise NonBinaryLabel("group ids must be 0 or 1")
        names = tuple(self.feature_names) or tuple(f"x{i}" for i in range(d))
        if len(names) != d:
            raise DimensionMismatch(f"{len(names)} feature names for {d} columns")
        ids = np.arange(n) if self.row_ids is None else np.asarray(self.row_ids)
        if len(ids) != n:
            raise DimensionMismatch(f"{len(ids)} row ids for {n} rows")
        X.setflags(write=False)
        y.setflags(write=False)
        g.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "groups", g)
        object.__setattr__(self, "feature_names", names)
        object.__setattr__(self, "row_ids", ids)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    def __len__(self):
        return self.n

    def subset(self, idx) -> "Dataset":
        idx = np.asarray(idx)
        return Dataset(self.X[idx], self.y[idx], self.groups[idx], self.feature_names, self.row_ids[idx])

    def group(self, g: int) -> "Dataset":
        return self.subset(np.flatnonzero(self.groups == g))

    def with_features(self, X: np.ndarray) -> "Dataset":
        return Dataset(X, self.y, self.groups, self.feature_names, self.row_ids)


def load_csv(path, label_column: str = "y", group_column: str = "g") -> Dataset:
    """Read a numeric CSV with a header row.

    Every column other than the label and group columns becomes a feature,
    in header order. Row ids are 0-based file order.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise EmptyDataset(f"{path}: file is empty") from None
        for col in (label_column, group_column):
            if col not in header:
                raise MissingColumn(f"{path}: column {col!r} not found in header {header}")
        li, gi = header.index(label_column), header.index(group_column)
        feat_idx = [i for i in range(len(header)) if i not in (li, gi)]
        rows, labels, groups = [], [], []
        for r, row in enumerate(reader):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise DimensionMismatch(f"{path}: row {r} has {len(row)} cells, header has {len(header)}")
            values = []
            for i, cell in enumerate(row):
                try:
                    values.append(float(cell))
                except ValueError:
                    raise NonNumericCell(
                        f"{path}: non-numeric value {cell!r} at row {r}, column {header[i]!r}"
                    ) from None
            for i, dest in ((li, labels), (gi, groups)):
                if values[i] not in (0.0, 1.0):
                    raise NonBinaryLabel(
                        f"{path}: column {header[i]!r} must be 0/1, got {row[i]!r} at row {r}"
                    )
                dest.append(int(values[i]))
            rows.append([values[i] for i in feat_idx])
    if not feat_idx:
        raise DimensionMismatch(f"{path}: no feature columns")
    X = np.array(rows, dtype=float).reshape(len(rows), len(feat_idx))
    return Dataset(X, labels, groups, tuple(header[i] for i in feat_idx))


def dataset_to_csv(data: Dataset, label_column: str = "y", group_column: str = "g") -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([*data.feature_names, label_column, group_column])
    for x, y, g in zip(data.X, data.y, data.groups):
        w.writerow([*(repr(float(v)) for v in x), int(y), int(g)])
    return buf.getvalue()


def save_csv(data: Dataset, path, label_column: str = "y", group_column: str = "g") -> None:
    Path(path).write_text(dataset_to_csv(data, label_column, group_column), encoding="utf-8")


@dataclass(frozen=True)
class Standardizer:
    mean: np.ndarray
    std: np.ndarray

    def apply(self, data: Dataset) -> Dataset:
        return data.with_features(self.transform(data.X))

    def transform(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.shape[-1] != len(self.mean):
            raise DimensionMismatch(f"expected {len(self.mean)} features, got {X.shape[-1]}")
        return (X - self.mean) / self.std

    def inverse(self, X) -> np.ndarray:
        return np.asarray(X, dtype=float) * self.std + self.mean

    def to_dict(self) -> dict:
        return {"mean": [float(v) for v in self.mean], "std": [float(v) for v in self.std]}

    @classmethod
    def from_dict(cls, d: dict) -> "Standardizer":
        return cls(np.asarray(d["mean"], dtype=float), np.asarray(d["std"], dtype=float))


def fit_standardizer(train: Dataset) -> Standardizer:
    if train.n == 0:
        raise EmptyDataset("cannot fit a standardizer on an empty dataset")
    mean = train.X.mean(axis=0)
    std = train.X.std(axis=0)
    # zero-variance columns are only centered
    std = np.where(std > 0, std, 1.0)
    return Standardizer(mean, std)


def apply(std: Standardizer, data: Dataset) -> Dataset:
    return std.apply(data)


def kfold_split(data: Dataset, k: int, seed: int | None = 0) -> list[tuple[np.ndarray, np.ndarray]]:
    """Shuffled k-fold split stratified jointly on (label, group).

    Each stratum is shuffled, strata are concatenated, and positions are dealt
    round-robin to folds, so fold sizes differ by at most one.
    """
    if k < 2:
        raise ConfigError(f"k must be >= 2, got {k}")
    n = data.n
    if n < k:
        raise TooFewSamples(f"{n} samples cannot be split into {k} folds")
    rng = np.random.default_rng(seed)
    order = []
    for label in (0, 1):
        for g in (0, 1):
            stratum = np.flatnonzero((data.y == label) & (data.groups == g))
            order.append(rng.permutation(stratum))
    order = np.concatenate(order)
    fold_of = np.empty(n, dtype=int)
    fold_of[order] = np.arange(n) % k
    everything = np.arange(n)
    return [(everything[fold_of != f], everything[fold_of == f]) for f in range(k)]


@dataclass(frozen=True)
class SyntheticSpec:
    """Two groups, two classes, Gaussian clusters along the first axis.

    ``disparity`` pushes group 0's class-0 cluster further from the class
    boundary, which inflates that group's counterfactual costs.
    """

    n_per_cell: int = 100
    dim: int = 5
    separation: float = 2.0
    disparity: float = 0.0
    seed: int = 0

    def validate(self) -> None:
        if self.n_per_cell < 2:
            raise ConfigError(f"n_per_cell must be >= 2, got {self.n_per_cell}")
        if self.dim < 1:
            raise ConfigError(f"dim must be >= 1, got {self.dim}")
        if not self.separation > 0:
            raise ConfigError(f"separation must be > 0, got {self.separation}")
        if not self.disparity >= 0:
            raise ConfigError(f"disparity must be >= 0, got {self.disparity}")

    @classmethod
    def parse(cls, text: str) -> "SyntheticSpec":
        """Build from ``key=value`` pairs separated by commas."""
        casts = {"n_per_cell": int, "dim": int, "separation": float, "disparity": float, "seed": int}
        kwargs = {}
        for part in filter(None, (p.strip() for p in text.split(","))):
            key, sep, value = part.partition("=")
            key = key.strip().replace("-", "_")
            if not sep or key not in casts:
                raise ConfigError(f"bad synthetic spec entry {part!r}; keys: {', '.join(casts)}")
            try:
                kwargs[key] = casts[key](value)
            except ValueError:
                raise ConfigError(f"bad value for {key}: {value!r}") from None
        return cls(**kwargs)


def generate_synthetic(spec: SyntheticSpec) -> Dataset:
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    n, d = spec.n_per_cell, spec.dim
    blocks, labels, groups = [], [], []
    for g in (0, 1):
        for label in (0, 1):
            center = np.zeros(d)
            if label == 1:
                center[0] = spec.separation / 2
            else:
                center[0] = -spec.separation / 2 - (spec.disparity if g == 0 else 0.0)
            blocks.append(center + rng.standard_normal((n, d)))
            labels += [label] * n
            groups += [g] * n
    return Dataset(np.vstack(blocks), labels, groups, tuple(f"x{i}" for i in range(d)))


def as_vector(x: Sequence[float] | np.ndarray, d: int | None = None) -> np.ndarray:
    v = np.asarray(x, dtype=float).reshape(-1)
    if d is not None and v.shape[0] != d:
        raise DimensionMismatch(f"expected a vector of length {d}, got {v.shape[0]}")
    if not np.all(np.isfinite(v)):
        raise ValueError("feature vector contains NaN or Inf")
    return v
