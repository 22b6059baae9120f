"""Cross-validated evaluation of group-fair counterfactuals.

Per fold: train on the training split (groups ignored), explain every
correctly classified test sample normally, estimate per-group cost pools on
the correctly classified training samples, pick the disadvantaged pool, draw
one target cost per explained test sample and compute its fair
counterfactual. Reports list per-group median costs in the column order
``Group-0, Group-1, Group-0-Fair, Group-1-Fair, Diff, Diff-Fair``.
"""

from __future__ import annotations

import csv
import io
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .data import Dataset, SyntheticSpec, fit_standardizer, generate_synthetic, kfold_split, load_csv
from .errors import ConfigError, EmptyPool, FairCFError
from .explain import CfConfig, CounterfactualResult, Method
from .fairness import (
    CostPool,
    FairCfConfig,
    compute_cost_pools,
    disadvantaged_pool,
    explain_one,
    fair_counterfactual,
    sample_z,
)
from .model import TrainConfig, train
from .optim import SimplexConfig

log = logging.getLogger(__name__)

CLASSIFIER_LABELS = {"logreg": "Logreg", "dectree": "Dectree", "gnb": "GNB"}
FAIR_SCOPES = ("all", "advantaged")
COST_COLUMNS = ("Group-0", "Group-1", "Group-0-Fair", "Group-1-Fair", "Diff", "Diff-Fair")


@dataclass(frozen=True)
class ExperimentConfig:
    classifier: str = "logreg"
    mode: Method = Method.CLOSEST
    folds: int = 3
    fair: FairCfConfig = field(default_factory=FairCfConfig)
    source: SyntheticSpec | str | Path = field(default_factory=SyntheticSpec)
    seed: int = 0
    train: TrainConfig = field(default_factory=TrainConfig)
    simplex: SimplexConfig = field(default_factory=SimplexConfig)
    # None: standardize CSV data, leave synthetic data (already unit scale) alone
    standardize: bool | None = None
    label_column: str = "y"
    group_column: str = "g"
    workers: int | None = None
    # "all": fair CFs for every explained sample; "advantaged": the disadvantaged
    # group keeps its normal CF and only the other group is pushed toward z
    fair_scope: str = "all"

    def validate(self) -> None:
        if self.classifier not in CLASSIFIER_LABELS:
            raise ConfigError(f"unknown classifier {self.classifier!r}; choose from {sorted(CLASSIFIER_LABELS)}")
        if Method(self.mode) not in (Method.CLOSEST, Method.PLAUSIBLE):
            raise ConfigError(f"mode must be closest or plausible, got {self.mode}")
        if self.fair_scope not in FAIR_SCOPES:
            raise ConfigError(f"fair_scope must be one of {FAIR_SCOPES}, got {self.fair_scope!r}")
        if self.folds < 2:
            raise ConfigError(f"folds must be >= 2, got {self.folds}")
        self.fair.validate()
        self.train.validate()
        self.simplex.validate()

    @property
    def cf_config(self) -> CfConfig:
        base = self.fair.base
        return CfConfig(self.fair.c0, base.margin, base.check_validity, base.escalations, base.polish)

    def dataset_name(self) -> str:
        if isinstance(self.source, SyntheticSpec):
            s = self.source
            return f"synthetic(d={s.dim},sep={s.separation:g},disp={s.disparity:g},seed={s.seed})"
        return Path(self.source).stem

    def load(self) -> Dataset:
        if isinstance(self.source, SyntheticSpec):
            return generate_synthetic(self.source)
        return load_csv(self.source, self.label_column, self.group_column)


@dataclass(frozen=True)
class ExplainedSample:
    fold: int
    index: int
    group: int
    label: int
    z: float
    normal: CounterfactualResult
    fair: CounterfactualResult


@dataclass(frozen=True)
class ReportRow:
    fold: str
    group0: float
    group1: float
    group0_fair: float
    group1_fair: float
    valid_rate: float = math.nan
    valid_rate_fair: float = math.nan
    n_group0: int = 0
    n_group1: int = 0

    @property
    def diff(self) -> float:
        return abs(self.group0 - self.group1)

    @property
    def diff_fair(self) -> float:
        return abs(self.group0_fair - self.group1_fair)

    def costs(self) -> tuple[float, ...]:
        return self.group0, self.group1, self.group0_fair, self.group1_fair, self.diff, self.diff_fair

    @classmethod
    def from_samples(cls, fold: str, samples: Sequence[ExplainedSample]) -> "ReportRow":
        med = {}
        for g in (0, 1):
            mine = [s for s in samples if s.group == g]
            if not mine:
                raise EmptyPool(f"{fold}: no correctly classified test sample in group {g}")
            med[g] = (float(np.median([s.normal.cost for s in mine])),
                      float(np.median([s.fair.cost for s in mine])))
        return cls(
            fold=fold,
            group0=med[0][0],
            group1=med[1][0],
            group0_fair=med[0][1],
            group1_fair=med[1][1],
            valid_rate=float(np.mean([s.normal.valid for s in samples])),
            valid_rate_fair=float(np.mean([s.fair.valid for s in samples])),
            n_group0=sum(s.group == 0 for s in samples),
            n_group1=sum(s.group == 1 for s in samples),
        )


@dataclass(frozen=True)
class ExperimentReport:
    classifier: str
    dataset: str
    mode: str
    pooled: ReportRow
    folds: tuple[ReportRow, ...] = ()
    samples: tuple[ExplainedSample, ...] = ()
    train_indices: tuple[np.ndarray, ...] = ()
    disadvantaged: tuple[int, ...] = ()

    def normal_pools(self) -> tuple[CostPool, CostPool]:
        return self._pools(lambda s: s.normal.cost)

    def fair_pools(self) -> tuple[CostPool, CostPool]:
        return self._pools(lambda s: s.fair.cost)

    def _pools(self, cost: Callable[[ExplainedSample], float]) -> tuple[CostPool, CostPool]:
        return (CostPool(tuple(cost(s) for s in self.samples if s.group == 0), 0),
                CostPool(tuple(cost(s) for s in self.samples if s.group == 1), 1))


def resolve_workers(workers: int | None) -> int:
    if workers is None:
        env = os.environ.get("FAIRCF_THREADS")
        if env:
            try:
                workers = int(env)
            except ValueError:
                raise ConfigError(f"FAIRCF_THREADS must be an integer, got {env!r}") from None
        else:
            workers = os.cpu_count() or 1
    return max(1, workers)


def _normal_task(args):
    return explain_one(*args)


def _fair_task(args):
    return fair_counterfactual(*args)


def run_experiment(config: ExperimentConfig) -> ExperimentReport:
    """Run the full k-fold protocol; deterministic for a fixed ``config.seed``."""
    config.validate()
    data = config.load()
    mode = Method(config.mode)
    standardize = config.standardize
    if standardize is None:
        standardize = not isinstance(config.source, SyntheticSpec)
    fold_seed, z_seed = np.random.SeedSequence(config.seed).spawn(2)
    try:
        splits = kfold_split(data, config.folds, fold_seed)
    except FairCFError as e:
        raise type(e)(f"splitting {config.dataset_name()}: {e}") from e
    z_rng = np.random.default_rng(z_seed)
    cfg = config.cf_config
    workers = resolve_workers(config.workers)
    executor = ProcessPoolExecutor(workers) if workers > 1 else None
    mapper: Callable[[Callable, Iterable], Iterable] = (
        partial(executor.map, chunksize=8) if executor else map  # type: ignore[assignment]
    )

    rows, samples, train_idx, disadvantaged = [], [], [], []
    try:
        for k, (tr, te) in enumerate(splits, start=1):
            try:
                fold_samples, dis = _run_fold(config, data, tr, te, k, mode, cfg, standardize, z_rng, mapper)
            except FairCFError as e:
                raise type(e)(f"fold {k}: {e}") from e
            rows.append(ReportRow.from_samples(f"fold-{k}", fold_samples))
            samples += fold_samples
            train_idx.append(tr)
            disadvantaged.append(dis)
            log.info("fold %d: explained %d samples, disadvantaged group %d", k, len(fold_samples), dis)
    finally:
        if executor:
            executor.shutdown()
    return ExperimentReport(
        classifier=CLASSIFIER_LABELS[config.classifier],
        dataset=config.dataset_name(),
        mode=mode.value,
        pooled=ReportRow.from_samples("pooled", samples),
        folds=tuple(rows),
        samples=tuple(samples),
        train_indices=tuple(train_idx),
        disadvantaged=tuple(disadvantaged),
    )


def _run_fold(config, data, tr, te, k, mode, cfg, standardize, z_rng, mapper):
    train_set, test_set = data.subset(tr), data.subset(te)
    if standardize:
        std = fit_standardizer(train_set)
        train_set, test_set = std.apply(train_set), std.apply(test_set)
    model = train(config.classifier, train_set, config.train)
    candidates = train_set if mode is Method.PLAUSIBLE else None

    z0, z1 = compute_cost_pools(model, train_set.group(0), train_set.group(1), cfg, mode, candidates,
                                config.simplex, map_fn=mapper)
    pool = disadvantaged_pool(z0, z1)

    correct = np.flatnonzero(model.predict_many(test_set.X) == test_set.y)
    # targets are drawn in sample order before any fan-out
    zs = [sample_z(pool, z_rng) for _ in correct]
    normal = list(mapper(_normal_task, [(model, test_set.X[i], mode, cfg, candidates, config.simplex)
                                        for i in correct]))
    pushed = [j for j, i in enumerate(correct) if config.fair_scope == "all" or test_set.groups[i] != pool.group]
    fair = list(normal)
    results = mapper(_fair_task, [(model, test_set.X[correct[j]], zs[j], config.fair, mode, candidates,
                                   config.simplex) for j in pushed])
    for j, r in zip(pushed, results):
        fair[j] = r
    out = [
        ExplainedSample(k, int(te[i]), int(test_set.groups[i]), int(test_set.y[i]), z, n, f)
        for i, z, n, f in zip(correct, zs, normal, fair)
    ]
    return out, pool.group


def _fmt(v: float) -> str:
    return "-" if math.isnan(v) else f"{v:.2f}"


def emit_report(report: ExperimentReport, fmt: str = "markdown") -> str:
    """Render the report as a markdown table (two decimals) or an unrounded CSV."""
    rows = [*report.folds, report.pooled]
    if fmt == "markdown":
        header = ["Clf", "Data set", "Fold", *COST_COLUMNS, "Valid", "Valid-Fair", "N-0", "N-1"]
        lines = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
        for r in rows:
            cells = [report.classifier, report.dataset, r.fold, *(_fmt(v) for v in r.costs()),
                     _fmt(r.valid_rate), _fmt(r.valid_rate_fair), str(r.n_group0), str(r.n_group1)]
            lines.append("| " + " | ".join(cells) + " |")
        return "\n".join(lines) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(REPORT_CSV_FIELDS)
        for r in rows:
            w.writerow([report.classifier, report.dataset, report.mode, r.fold,
                        *(repr(float(v)) for v in r.costs()),
                        repr(r.valid_rate), repr(r.valid_rate_fair), r.n_group0, r.n_group1])
        return buf.getvalue()
    raise ConfigError(f"unknown report format {fmt!r}")


REPORT_CSV_FIELDS = ("clf", "dataset", "mode", "fold", "group0", "group1", "group0_fair", "group1_fair",
                     "diff", "diff_fair", "valid_rate", "valid_rate_fair", "n_group0", "n_group1")


def parse_report_csv(text: str) -> list[dict]:
    out = []
    for row in csv.DictReader(io.StringIO(text)):
        parsed = dict(row)
        for key in REPORT_CSV_FIELDS[4:12]:
            parsed[key] = float(row[key])
        for key in ("n_group0", "n_group1"):
            parsed[key] = int(row[key])
        out.append(parsed)
    return out


def emit_histogram_data(normal_pools: Sequence[CostPool], fair_pools: Sequence[CostPool]) -> str:
    """Long-format ``group_id,variant,cost`` CSV, one row per explained sample and variant."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["group_id", "variant", "cost"])
    for variant, pools in (("normal", normal_pools), ("fair", fair_pools)):
        for pool in pools:
            pool.require()
            if pool.group not in (0, 1):
                raise ConfigError(f"group id must be 0 or 1, got {pool.group}")
            for c in pool.costs:
                w.writerow([pool.group, variant, repr(c)])
    return buf.getvalue()


def write_outputs(report: ExperimentReport, out_dir, figure: bool = True) -> dict[str, Path]:
    """Write report.md, report.csv, costs_hist.csv and (optionally) costs_hist.png."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "markdown": out / "report.md",
        "csv": out / "report.csv",
        "histogram": out / "costs_hist.csv",
    }
    paths["markdown"].write_text(emit_report(report, "markdown"), encoding="utf-8")
    paths["csv"].write_text(emit_report(report, "csv"), encoding="utf-8")
    normal, fair = report.normal_pools(), report.fair_pools()
    paths["histogram"].write_text(emit_histogram_data(normal, fair), encoding="utf-8")
    if figure:
        from .plotting import plot_cost_histograms

        paths["figure"] = plot_cost_histograms(
            normal, fair, out / "costs_hist.png",
            title=f"{report.classifier} / {report.dataset} ({report.mode})",
        )
    return paths
