"""Closest and plausible counterfactuals for binary classifiers.

A counterfactual ``x_cf`` for ``x_orig`` is a point the model assigns the
opposite label. Its cost is the 1-norm distance to ``x_orig``.

Closest counterfactuals minimize ``theta(x, x_orig) + loss_weight * loss(x)``
with the simplex solver, where ``loss`` is a hinge on the class-1 score.
Plausible counterfactuals are the nearest candidate (usually a training
sample) that the model already assigns the target label.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

import numpy as np

from .data import Dataset, as_vector
from .errors import ConfigError, DimensionMismatch, NoValidCandidate
from .model import PredictionModel
from .optim import SimplexConfig, minimize


class Method(str, enum.Enum):
    CLOSEST = "closest"
    PLAUSIBLE = "plausible"
    FAIR_CLOSEST = "fair-closest"
    FAIR_PLAUSIBLE = "fair-plausible"


@dataclass(frozen=True)
class CfConfig:
    """Settings for the counterfactual objective.

    ``loss_weight`` multiplies the prediction loss while the distance keeps
    weight 1. This is the same minimizer as ``loss + C * theta`` with
    ``C = 1 / loss_weight``.
    """

    loss_weight: float = 100.0
    margin: float = 0.05
    check_validity: bool = True
    escalations: int = 6
    polish: int = 3

    def validate(self) -> None:
        if not self.loss_weight > 0:
            raise ConfigError(f"loss_weight must be > 0, got {self.loss_weight}")
        if not 0 <= self.margin < 0.5:
            raise ConfigError(f"margin must lie in [0, 0.5), got {self.margin}")
        if self.escalations < 0 or self.polish < 0:
            raise ConfigError(f"escalations and polish must be >= 0, got {self.escalations}, {self.polish}")


@dataclass(frozen=True)
class CounterfactualResult:
    x_orig: np.ndarray
    x_cf: np.ndarray
    y_cf: int
    cost: float
    valid: bool
    method: Method
    iterations: int = 0
    candidate_index: int | None = field(default=None, compare=False)

    @property
    def delta(self) -> np.ndarray:
        return self.x_cf - self.x_orig

    def to_dict(self) -> dict:
        return {
            "x_orig": [float(v) for v in self.x_orig],
            "x_cf": [float(v) for v in self.x_cf],
            "y_cf": self.y_cf,
            "cost": self.cost,
            "valid": self.valid,
            "method": self.method.value,
            "iterations": self.iterations,
        }


def theta(a, b) -> float:
    """1-norm distance between two feature vectors."""
    a = np.asarray(a, dtype=float).reshape(-1)
    b = np.asarray(b, dtype=float).reshape(-1)
    if a.shape != b.shape:
        raise DimensionMismatch(f"cannot compare vectors of length {a.shape[0]} and {b.shape[0]}")
    return float(np.abs(a - b).sum())


def target_label(model: PredictionModel, x_orig) -> int:
    return 1 - model.predict(x_orig)


def cf_loss(model: PredictionModel, x, y_cf: int, margin: float = 0.05) -> float:
    """Hinge on the score; zero only when ``x`` gets ``y_cf`` with ``margin`` to spare."""
    return _hinge(model.score(x), y_cf, margin)


def _hinge(score: float, y_cf: int, margin: float) -> float:
    if y_cf == 1:
        return max(0.0, 0.5 + margin - score)
    return max(0.0, score - 0.5 + margin)


def make_result(model, x_orig, x_cf, y_cf, method, iterations=0, candidate_index=None) -> CounterfactualResult:
    x_cf = np.array(x_cf, dtype=float)
    return CounterfactualResult(
        x_orig=np.array(x_orig, dtype=float),
        x_cf=x_cf,
        y_cf=int(y_cf),
        cost=theta(x_orig, x_cf),
        valid=model.predict(x_cf) == y_cf,
        method=method,
        iterations=iterations,
        candidate_index=candidate_index,
    )


def solve_counterfactual(model, x_orig, y_cf, objective, simplex: SimplexConfig, method: Method,
                         cfg: CfConfig) -> CounterfactualResult:
    """Minimize ``objective`` from ``x_orig`` and apply the restart policy.

    An invalid answer is retried from the best point with half the step,
    then with steps growing 2x, 4x, ... (``cfg.escalations`` times), which
    gets the simplex off flat score plateaus. A valid answer is then polished
    by restarting with the base step while that still lowers the objective
    (at most ``cfg.polish`` times); the 1-norm kinks can stall a single run.
    """
    res = minimize(objective, x_orig, simplex)
    iterations = res.iterations
    if cfg.check_validity and model.predict(res.argmin) != y_cf:
        steps = [simplex.step / 2] + [simplex.step * 2 ** k for k in range(1, cfg.escalations + 1)]
        for step in steps:
            retry = minimize(objective, res.argmin, replace(simplex, step=step))
            iterations += retry.iterations
            retry_valid = model.predict(retry.argmin) == y_cf
            if retry_valid or retry.value < res.value:
                res = retry
            if retry_valid:
                break
    for _ in range(cfg.polish):
        again = minimize(objective, res.argmin, simplex)
        iterations += again.iterations
        if not again.value < res.value - simplex.f_tol:
            break
        res = again
    return make_result(model, x_orig, res.argmin, y_cf, method, iterations)


def closest_counterfactual(model: PredictionModel, x_orig, cfg: CfConfig | None = None,
                           simplex: SimplexConfig | None = None) -> CounterfactualResult:
    cfg = cfg or CfConfig()
    cfg.validate()
    simplex = simplex or SimplexConfig()
    x_orig = as_vector(x_orig, model.dim)
    y_cf = target_label(model, x_orig)
    weight, margin = cfg.loss_weight, cfg.margin
    score = model.score

    dist = np.add.reduce

    def objective(x):
        return float(dist(np.abs(x - x_orig))) + weight * _hinge(score(x), y_cf, margin)

    return solve_counterfactual(model, x_orig, y_cf, objective, simplex, Method.CLOSEST, cfg)


def valid_candidates(model: PredictionModel, candidates: Dataset | np.ndarray, y_cf: int):
    X = candidates.X if isinstance(candidates, Dataset) else np.asarray(candidates, dtype=float)
    if X.ndim != 2 or X.shape[0] == 0:
        raise NoValidCandidate("candidate set is empty")
    if X.shape[1] != model.dim:
        raise DimensionMismatch(f"candidates have {X.shape[1]} features, model expects {model.dim}")
    scores = model.score_many(X)
    idx = np.flatnonzero((scores >= 0.5).astype(int) == y_cf)
    if idx.size == 0:
        raise NoValidCandidate(f"no candidate is predicted as class {y_cf}")
    return X, idx, scores


def plausible_counterfactual(model: PredictionModel, x_orig, candidates: Dataset | np.ndarray) -> CounterfactualResult:
    """Nearest candidate (1-norm) that the model assigns the target label."""
    x_orig = as_vector(x_orig, model.dim)
    y_cf = target_label(model, x_orig)
    X, idx, _ = valid_candidates(model, candidates, y_cf)
    dist = np.abs(X[idx] - x_orig).sum(axis=1)
    best = int(idx[np.argmin(dist)])  # argmin keeps the first, i.e. lowest index
    return make_result(model, x_orig, X[best], y_cf, Method.PLAUSIBLE, candidate_index=best)
