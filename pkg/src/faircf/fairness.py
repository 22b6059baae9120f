"""Group-fair counterfactuals.

The fair objective adds a hinge to the closest-counterfactual objective::

    theta(x_orig, x) + c0 * loss(x) + c1 * max(0, z - theta(x_orig, x))

where ``z`` is a counterfactual cost drawn at random from the pool of the
disadvantaged group (the group whose counterfactuals are costlier on
average). For ``c1 > 1`` the hinge raises any cost below ``z`` up to ``z``,
so both groups end up with costs distributed like the disadvantaged group's.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .data import Dataset, as_vector
from .errors import ConfigError, EmptyPool, NoValidCandidate
from .explain import (
    CfConfig,
    CounterfactualResult,
    Method,
    _hinge,
    closest_counterfactual,
    make_result,
    plausible_counterfactual,
    solve_counterfactual,
    target_label,
    valid_candidates,
)
from .model import PredictionModel
from .optim import SimplexConfig


@dataclass(frozen=True)
class CostPool:
    """Counterfactual costs observed for one protected group."""

    costs: tuple[float, ...]
    group: int
    source_count: int = -1

    def __post_init__(self):
        costs = tuple(float(c) for c in self.costs)
        if any(not c >= 0 for c in costs):
            raise ValueError("costs must be non-negative")
        object.__setattr__(self, "costs", costs)
        if self.source_count < 0:
            object.__setattr__(self, "source_count", len(costs))

    def __len__(self):
        return len(self.costs)

    def require(self) -> "CostPool":
        if not self.costs:
            raise EmptyPool(f"cost pool of group {self.group} is empty")
        return self

    def mean(self) -> float:
        return float(np.mean(self.require().costs))

    def median(self) -> float:
        return float(np.median(self.require().costs))


@dataclass(frozen=True)
class FairCfConfig:
    c0: float = 100.0
    c1: float = 10.0
    seed: int = 0
    base: CfConfig = field(default_factory=CfConfig)

    def validate(self) -> None:
        if not (self.c0 > 0 and self.c1 > 0):
            raise ConfigError(f"c0 and c1 must be > 0, got {self.c0}, {self.c1}")
        self.base.validate()


@dataclass(frozen=True)
class FairnessGapReport:
    mean0: float
    mean1: float
    median0: float
    median1: float

    @property
    def mean_gap(self) -> float:
        return abs(self.mean0 - self.mean1)

    @property
    def median_gap(self) -> float:
        return abs(self.median0 - self.median1)


def compute_cost_pools(model: PredictionModel, group0: Dataset, group1: Dataset, cfg: CfConfig | None = None,
                       mode: Method | str = Method.CLOSEST, candidates: Dataset | None = None,
                       simplex: SimplexConfig | None = None, map_fn=map) -> tuple[CostPool, CostPool]:
    """Costs of counterfactuals for every correctly classified sample of each group.

    Only valid counterfactuals contribute a cost. ``map_fn`` may be swapped
    for a parallel, order-preserving map.
    """
    mode = Method(mode)
    if mode not in (Method.CLOSEST, Method.PLAUSIBLE):
        raise ConfigError(f"pool mode must be closest or plausible, got {mode.value}")
    if mode is Method.PLAUSIBLE and (candidates is None or candidates.n == 0):
        raise NoValidCandidate("plausible mode needs a nonempty candidate set")
    pools = []
    for g, data in ((0, group0), (1, group1)):
        if data.n == 0:
            raise EmptyPool(f"group {g} has no samples")
        correct = np.flatnonzero(model.predict_many(data.X) == data.y)
        tasks = [(model, data.X[i], mode, cfg, candidates, simplex) for i in correct]
        costs = [r.cost for r in map_fn(_explain_task, tasks) if r.valid]
        if not costs:
            raise EmptyPool(f"group {g} yields no valid counterfactual among correctly classified samples")
        pools.append(CostPool(tuple(costs), g))
    return pools[0], pools[1]


def _explain_task(args) -> CounterfactualResult:
    return explain_one(*args)


def explain_one(model, x, mode: Method, cfg=None, candidates=None, simplex=None) -> CounterfactualResult:
    if Method(mode) is Method.PLAUSIBLE:
        return plausible_counterfactual(model, x, candidates)
    return closest_counterfactual(model, x, cfg, simplex)


def disadvantaged_pool(z1: CostPool, z2: CostPool) -> CostPool:
    """The pool with the strictly larger mean cost; ties go to the second pool."""
    z1.require()
    z2.require()
    return z1 if z1.mean() > z2.mean() else z2


def sample_z(pool: CostPool, rng: np.random.Generator) -> float:
    pool.require()
    return pool.costs[int(rng.integers(len(pool.costs)))]


def draw_zs(pool: CostPool, count: int, seed) -> list[float]:
    """Pre-draw ``count`` targets in order from one seeded generator."""
    rng = np.random.default_rng(seed)
    return [sample_z(pool, rng) for _ in range(count)]


def fair_objective(model, x_orig, y_cf, z, cfg: FairCfConfig):
    c0, c1, margin = cfg.c0, cfg.c1, cfg.base.margin
    score = model.score
    add = np.add.reduce

    def objective(x):
        dist = float(add(np.abs(x - x_orig)))
        return dist + c0 * _hinge(score(x), y_cf, margin) + c1 * max(0.0, z - dist)

    return objective


def fair_counterfactual(model: PredictionModel, x_orig, z: float, cfg: FairCfConfig | None = None,
                        mode: Method | str = Method.CLOSEST, candidates: Dataset | np.ndarray | None = None,
                        simplex: SimplexConfig | None = None) -> CounterfactualResult:
    """Counterfactual whose cost is pushed up towards the sampled target ``z``.

    Closest mode runs the simplex solver from ``x_orig``. Plausible mode
    scans the candidates the model assigns the target label and returns the
    objective minimizer, ties going to the lowest index.
    """
    cfg = cfg or FairCfConfig()
    cfg.validate()
    if not z >= 0:
        raise ValueError(f"target cost z must be >= 0, got {z}")
    x_orig = as_vector(x_orig, model.dim)
    y_cf = target_label(model, x_orig)
    mode = Method(mode)
    if mode in (Method.PLAUSIBLE, Method.FAIR_PLAUSIBLE):
        if candidates is None:
            raise NoValidCandidate("plausible mode needs a candidate set")
        X, idx, scores = valid_candidates(model, candidates, y_cf)
        dist = np.abs(X[idx] - x_orig).sum(axis=1)
        s = scores[idx]
        loss = np.maximum(0.0, 0.5 + cfg.base.margin - s) if y_cf == 1 else np.maximum(0.0, s - 0.5 + cfg.base.margin)
        values = dist + cfg.c0 * loss + cfg.c1 * np.maximum(0.0, z - dist)
        best = int(idx[np.argmin(values)])
        return make_result(model, x_orig, X[best], y_cf, Method.FAIR_PLAUSIBLE, candidate_index=best)
    objective = fair_objective(model, x_orig, y_cf, z, cfg)
    return solve_counterfactual(model, x_orig, y_cf, objective, simplex or SimplexConfig(),
                                Method.FAIR_CLOSEST, cfg.base)


def fairness_gap(costs0: CostPool | Sequence[float], costs1: CostPool | Sequence[float]) -> FairnessGapReport:
    p0 = costs0 if isinstance(costs0, CostPool) else CostPool(tuple(costs0), 0)
    p1 = costs1 if isinstance(costs1, CostPool) else CostPool(tuple(costs1), 1)
    return FairnessGapReport(p0.mean(), p1.mean(), p0.median(), p1.median())


def pools_to_csv(pools: Sequence[CostPool]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["group_id", "cost"])
    for pool in pools:
        for c in pool.costs:
            w.writerow([pool.group, repr(c)])
    return buf.getvalue()


def save_pools(path, pools: Sequence[CostPool]) -> None:
    Path(path).write_text(pools_to_csv(pools), encoding="utf-8")


def load_pools(path) -> tuple[CostPool, CostPool]:
    """Read a ``group_id,cost`` CSV into the pools of groups 0 and 1."""
    costs: dict[int, list[float]] = {0: [], 1: []}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"group_id", "cost"} <= set(reader.fieldnames):
            raise ConfigError(f"{path}: expected columns group_id,cost")
        for row in reader:
            g = int(float(row["group_id"]))
            if g not in costs:
                raise ConfigError(f"{path}: group_id must be 0 or 1, got {row['group_id']!r}")
            costs[g].append(float(row["cost"]))
    return CostPool(tuple(costs[0]), 0), CostPool(tuple(costs[1]), 1)
