import csv
import io
import math

import numpy as np
import pytest

from faircf.data import SyntheticSpec, generate_synthetic
from faircf.errors import ConfigError, EmptyPool
from faircf.explain import Method
from faircf.fairness import CostPool, compute_cost_pools, disadvantaged_pool
from faircf.harness import (
    ExperimentConfig,
    ExperimentReport,
    ReportRow,
    emit_histogram_data,
    emit_report,
    parse_report_csv,
    run_experiment,
    write_outputs,
)
from faircf.model import train

SMALL = SyntheticSpec(n_per_cell=15, dim=2, disparity=3.0, seed=1)


def small(**kw):
    return ExperimentConfig(source=SMALL, workers=1, **kw)


@pytest.fixture(scope="module")
def closest_report():
    return run_experiment(small())


@pytest.fixture(scope="module")
def plausible_report():
    return run_experiment(small(mode=Method.PLAUSIBLE, classifier="dectree"))


def fake_report(*rows):
    return ExperimentReport("Logreg", "demo", "closest", rows[-1], tuple(rows[:-1]), (), (), ())


def test_deterministic(closest_report):
    again = run_experiment(small())
    assert emit_report(again, "csv") == emit_report(closest_report, "csv")
    assert [s.z for s in again.samples] == [s.z for s in closest_report.samples]


def test_only_correctly_classified_explained(closest_report):
    data = generate_synthetic(SMALL)
    assert closest_report.samples
    for s in closest_report.samples:
        assert data.y[s.index] == s.label
        assert data.groups[s.index] == s.group
        # the normal CF flips the model's prediction, which was the true label
        assert s.normal.y_cf == 1 - s.label


def test_each_sample_explained_once(closest_report):
    idx = [s.index for s in closest_report.samples]
    assert len(idx) == len(set(idx))
    for s in closest_report.samples:
        np.testing.assert_array_equal(s.normal.x_orig, s.fair.x_orig)
        assert s.fair.method is Method.FAIR_CLOSEST


def test_test_samples_disjoint_from_training(closest_report):
    for s in closest_report.samples:
        assert s.index not in set(closest_report.train_indices[s.fold - 1].tolist())


def test_pooled_medians_match_histogram_data(closest_report):
    rows = list(csv.DictReader(io.StringIO(emit_histogram_data(closest_report.normal_pools(),
                                                               closest_report.fair_pools()))))
    p = closest_report.pooled
    for variant, expect in (("normal", (p.group0, p.group1)), ("fair", (p.group0_fair, p.group1_fair))):
        for g in (0, 1):
            costs = [float(r["cost"]) for r in rows if r["variant"] == variant and r["group_id"] == str(g)]
            assert np.median(costs) == expect[g]
    assert p.diff == abs(p.group0 - p.group1)
    assert p.n_group0 + p.n_group1 == len(closest_report.samples)


def test_fold_rows(closest_report):
    assert [r.fold for r in closest_report.folds] == ["fold-1", "fold-2", "fold-3"]
    assert sum(r.n_group0 + r.n_group1 for r in closest_report.folds) == len(closest_report.samples)
    assert set(closest_report.disadvantaged) <= {0, 1}


def test_disparity_shows_up_and_shrinks(closest_report):
    p = closest_report.pooled
    assert p.group0 > p.group1
    assert p.diff_fair < p.diff
    assert p.valid_rate == 1.0


def test_z_drawn_from_training_pool(closest_report):
    # rebuild fold 1's pools from its training split (synthetic data is not standardized)
    train_set = generate_synthetic(SMALL).subset(closest_report.train_indices[0])
    model = train("logreg", train_set)
    pools = compute_cost_pools(model, train_set.group(0), train_set.group(1))
    pool = pools[closest_report.disadvantaged[0]]
    assert pool is disadvantaged_pool(*pools)
    zs = [s.z for s in closest_report.samples if s.fold == 1]
    assert zs and all(math.isfinite(z) and z in pool.costs for z in zs)


def test_advantaged_scope_keeps_disadvantaged_cfs():
    report = run_experiment(small(fair_scope="advantaged"))
    for s in report.samples:
        if s.group == report.disadvantaged[s.fold - 1]:
            assert s.fair is s.normal
        else:
            assert s.fair.method is Method.FAIR_CLOSEST


def test_plausible_results_are_training_members(plausible_report):
    data = generate_synthetic(SMALL)
    assert plausible_report.samples
    for s in plausible_report.samples:
        train = data.X[plausible_report.train_indices[s.fold - 1]]
        for r in (s.normal, s.fair):
            assert r.valid
            assert any(np.array_equal(r.x_cf, row) for row in train)


def test_emit_report_two_decimal_gaps():
    row = ReportRow("pooled", 0.96, 0.97, 1.62, 1.65)
    md = emit_report(fake_report(row))
    last = md.strip().splitlines()[-1]
    cells = [c.strip() for c in last.strip("|").split("|")]
    assert cells[3:9] == ["0.96", "0.97", "1.62", "1.65", "0.01", "0.03"]
    zero = emit_report(fake_report(ReportRow("pooled", 1.0, 1.0, 2.0, 2.0)))
    assert "| 0.00 | 0.00 |" in zero


def test_emit_report_header():
    md = emit_report(fake_report(ReportRow("pooled", 1.0, 2.0, 3.0, 4.0)))
    header = [c.strip() for c in md.splitlines()[0].strip("|").split("|")]
    assert header[:9] == ["Clf", "Data set", "Fold", "Group-0", "Group-1", "Group-0-Fair", "Group-1-Fair",
                          "Diff", "Diff-Fair"]


def test_report_csv_round_trip(closest_report):
    rows = parse_report_csv(emit_report(closest_report, "csv"))
    assert len(rows) == len(closest_report.folds) + 1
    pooled = rows[-1]
    assert pooled["fold"] == "pooled"
    assert float(pooled["diff_fair"]) == closest_report.pooled.diff_fair
    assert float(pooled["group0"]) == closest_report.pooled.group0


def test_emit_report_rejects_unknown_format(closest_report):
    with pytest.raises(ConfigError):
        emit_report(closest_report, "xml")


def test_histogram_rows_and_groups():
    normal = (CostPool((1.0, 2.0, 3.0), 0), CostPool((0.5, 0.25, 4.0, 8.0), 1))
    fair = (CostPool((3.0, 2.0, 1.0), 0), CostPool((8.0, 4.0, 0.25, 0.5), 1))
    text = emit_histogram_data(normal, fair)
    rows = list(csv.DictReader(io.StringIO(text)))
    assert len(rows) == 14
    assert {r["group_id"] for r in rows} == {"0", "1"}
    assert [float(r["cost"]) for r in rows if r["variant"] == "normal" and r["group_id"] == "1"] == [0.5, 0.25, 4.0, 8.0]


def test_write_outputs(tmp_path, closest_report):
    paths = write_outputs(closest_report, tmp_path)
    for name in ("report.md", "report.csv", "costs_hist.csv", "costs_hist.png"):
        assert (tmp_path / name).exists()
    assert (tmp_path / "costs_hist.png").read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
    assert set(paths) >= {"histogram"}


def test_write_outputs_without_figure(tmp_path, closest_report):
    write_outputs(closest_report, tmp_path, figure=False)
    assert not (tmp_path / "costs_hist.png").exists()


@pytest.mark.parametrize("kw", [{"classifier": "svm"}, {"folds": 1}, {"fair_scope": "none"},
                                {"mode": Method.FAIR_CLOSEST}])
def test_config_validation(kw):
    with pytest.raises(ConfigError):
        run_experiment(small(**kw))


def test_fold_context_in_errors():
    # 2 samples per cell leave some test fold without an explainable group-0 sample
    cfg = ExperimentConfig(source=SyntheticSpec(n_per_cell=2, dim=2, seed=0), classifier="gnb", workers=1)
    with pytest.raises(EmptyPool, match=r"fold-?\d"):
        run_experiment(cfg)


def test_parallel_matches_serial():
    serial = run_experiment(small(classifier="gnb", mode=Method.PLAUSIBLE))
    parallel = run_experiment(ExperimentConfig(source=SMALL, classifier="gnb", mode=Method.PLAUSIBLE, workers=2))
    assert emit_report(serial, "csv") == emit_report(parallel, "csv")
