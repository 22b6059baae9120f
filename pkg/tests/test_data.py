import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from faircf.data import (
    Dataset,
    SyntheticSpec,
    dataset_to_csv,
    fit_standardizer,
    generate_synthetic,
    kfold_split,
    load_csv,
)
from faircf.errors import ConfigError, EmptyDataset, MissingColumn, NonBinaryLabel, NonNumericCell, TooFewSamples


def write(tmp_path, text, name="d.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_load_csv_counts_and_excludes_group(tmp_path):
    p = write(tmp_path, "f1,f2,y,sex\n1,2,0,1\n3,4,1,0\n5,6,1,1\n")
    d = load_csv(p, "y", "sex")
    assert (d.n, d.d) == (3, 2)
    assert d.feature_names == ("f1", "f2")
    assert d.groups.tolist() == [1, 0, 1]
    assert d.row_ids.tolist() == [0, 1, 2]


def test_load_csv_features_in_header_order(tmp_path):
    p = write(tmp_path, "y,b,g,a\n0,1,0,2\n1,3,1,4\n")
    d = load_csv(p)
    assert d.feature_names == ("b", "a")
    np.testing.assert_array_equal(d.X, [[1, 2], [3, 4]])


def test_load_csv_rejects_non_binary_group(tmp_path):
    p = write(tmp_path, "f1,y,g\n1,0,2\n")
    with pytest.raises(NonBinaryLabel):
        load_csv(p)


def test_load_csv_missing_label(tmp_path):
    p = write(tmp_path, "f1,label,g\n1,0,1\n")
    with pytest.raises(MissingColumn):
        load_csv(p, "y", "g")


def test_load_csv_non_numeric_cell_reports_location(tmp_path):
    p = write(tmp_path, "f1,f2,y,g\n1,2,0,1\n1,abc,1,0\n")
    with pytest.raises(NonNumericCell, match=r"row 1, column 'f2'"):
        load_csv(p)


def test_csv_round_trip(tmp_path):
    d = generate_synthetic(SyntheticSpec(n_per_cell=5, dim=3, disparity=1.0, seed=3))
    p = write(tmp_path, dataset_to_csv(d))
    back = load_csv(p)
    np.testing.assert_array_equal(back.X, d.X)
    np.testing.assert_array_equal(back.y, d.y)
    np.testing.assert_array_equal(back.groups, d.groups)


def test_standardizer_z_scores():
    d = Dataset(np.array([[1.0], [2.0], [3.0]]), [0, 1, 0], [0, 0, 1])
    out = fit_standardizer(d).apply(d)
    np.testing.assert_allclose(out.X[:, 0], [-1.224744871391589, 0.0, 1.224744871391589], atol=1e-12)


def test_standardizer_constant_column_centered():
    d = Dataset(np.array([[4.0, 1.0], [4.0, 2.0], [4.0, 3.0]]), [0, 1, 0], [0, 0, 1])
    std = fit_standardizer(d)
    assert std.std[0] == 1.0
    np.testing.assert_array_equal(std.apply(d).X[:, 0], 0.0)


def test_standardizer_uses_training_statistics():
    train = Dataset(np.array([[0.0], [2.0]]), [0, 1], [0, 1])
    test = Dataset(np.array([[10.0]]), [1], [0])
    # train mean 1, std 1
    assert fit_standardizer(train).apply(test).X[0, 0] == 9.0


def test_standardizer_empty():
    with pytest.raises(EmptyDataset):
        fit_standardizer(Dataset(np.zeros((0, 2)), [], []))


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 5), st.integers(2, 40), st.integers(0, 2**31))
def test_standardized_training_split_moments(d, n, seed):
    rng = np.random.default_rng(seed)
    X = rng.normal(rng.normal(0, 10, d), rng.uniform(0.1, 5, d), (n, d))
    data = Dataset(X, rng.integers(0, 2, n), rng.integers(0, 2, n))
    std = fit_standardizer(data)
    out = std.apply(data)
    assert np.all(np.abs(out.X.mean(axis=0)) < 1e-9)
    nonconst = data.X.std(axis=0) > 0
    assert np.all(np.abs(out.X.std(axis=0)[nonconst] - 1) < 1e-9)
    # re-applying the stored statistics to the original data is idempotent
    np.testing.assert_allclose(std.apply(data).X, out.X, atol=1e-12)


def _toy(n):
    rng = np.random.default_rng(n)
    return Dataset(rng.normal(size=(n, 2)), np.arange(n) % 2, (np.arange(n) // 2) % 2)


def test_kfold_partition_nine_three():
    folds = kfold_split(_toy(9), 3, seed=1)
    tests = [te for _, te in folds]
    assert [len(t) for t in tests] == [3, 3, 3]
    assert sorted(np.concatenate(tests).tolist()) == list(range(9))
    for tr, te in folds:
        assert not set(tr) & set(te)
        assert len(tr) + len(te) == 9


def test_kfold_deterministic():
    a = kfold_split(_toy(20), 3, seed=5)
    b = kfold_split(_toy(20), 3, seed=5)
    for (tr1, te1), (tr2, te2) in zip(a, b):
        np.testing.assert_array_equal(te1, te2)
        np.testing.assert_array_equal(tr1, tr2)


def test_kfold_too_few_samples():
    with pytest.raises(TooFewSamples):
        kfold_split(_toy(2), 3)


def test_kfold_rejects_k1():
    with pytest.raises(ConfigError):
        kfold_split(_toy(6), 1)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 7), st.integers(0, 60), st.integers(0, 1000))
def test_kfold_partitions_and_balances(k, extra, seed):
    data = _toy(k + extra)
    folds = kfold_split(data, k, seed)
    tests = [te for _, te in folds]
    sizes = [len(t) for t in tests]
    assert max(sizes) - min(sizes) <= 1
    assert sorted(np.concatenate(tests).tolist()) == list(range(data.n))


def test_kfold_stratifies_label_group_cells():
    data = generate_synthetic(SyntheticSpec(n_per_cell=30, dim=2, seed=0))
    for _, te in kfold_split(data, 3, seed=0):
        for label in (0, 1):
            for g in (0, 1):
                assert np.sum((data.y[te] == label) & (data.groups[te] == g)) == 10


def test_synthetic_layout():
    spec = SyntheticSpec(n_per_cell=400, dim=3, separation=2.0, disparity=3.0, seed=0)
    d = generate_synthetic(spec)
    assert (d.n, d.d) == (1600, 3)
    assert "g" not in d.feature_names and "y" not in d.feature_names

    def center(g, label):
        return d.X[(d.groups == g) & (d.y == label)].mean(axis=0)

    # 4 sigma of the sample mean with 400 samples is 0.2
    assert abs(center(0, 1)[0] - 1.0) < 0.2 and abs(center(1, 1)[0] - 1.0) < 0.2
    assert abs(center(1, 0)[0] + 1.0) < 0.2
    assert abs(center(0, 0)[0] + 4.0) < 0.2
    assert np.all(np.abs(center(0, 0)[1:]) < 0.2)


def test_synthetic_deterministic_bytes():
    spec = SyntheticSpec(n_per_cell=10, dim=4, disparity=1.5, seed=9)
    assert dataset_to_csv(generate_synthetic(spec)) == dataset_to_csv(generate_synthetic(spec))


@pytest.mark.parametrize("kwargs", [{"dim": 0}, {"n_per_cell": 1}, {"separation": 0.0}, {"disparity": -1.0}])
def test_synthetic_rejects_bad_spec(kwargs):
    with pytest.raises(ConfigError):
        generate_synthetic(SyntheticSpec(**kwargs))


def test_synthetic_spec_parse():
    spec = SyntheticSpec.parse("n_per_cell=7, dim=3,separation=1.5,disparity=2,seed=4")
    assert spec == SyntheticSpec(7, 3, 1.5, 2.0, 4)
    with pytest.raises(ConfigError):
        SyntheticSpec.parse("bogus=1")
