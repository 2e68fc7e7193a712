import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from densecost.data import (DataError, Dataset, Standardizer, clean, kfold,
                            load_csv, load_libsvm, parse_label_map, save_csv,
                            shuffle)


def test_dataset_validation():
    with pytest.raises(DataError):
        Dataset(np.zeros(3), np.zeros(3))
    with pytest.raises(DataError):
        Dataset(np.zeros((3, 2)), np.zeros(4))


def test_dataset_subset_keeps_counters():
    ds = Dataset(np.arange(6.0).reshape(3, 2), np.array([1.0, -1.0, 1.0]))
    ds.duplicates_removed = 2
    sub = ds.subset(np.array([2, 0]))
    assert np.array_equal(sub.X, ds.X[[2, 0]])
    assert sub.duplicates_removed == 2


def test_csv_roundtrip_is_bitwise(tmp_path):
    rng = np.random.default_rng(0)
    ds = Dataset(rng.normal(size=(20, 4)) * 1e3,
                 np.where(rng.random(20) < 0.5, 1.0, -1.0))
    path = tmp_path / "t.csv"
    save_csv(ds, path)
    back = load_csv(path)
    assert np.array_equal(back.X, ds.X)
    assert np.array_equal(back.y, ds.y)


def test_load_csv_label_map(tmp_path):
    path = tmp_path / "t.csv"
    path.write_text("0.5,1.5,g\n-0.5,2.5,b\n")
    ds = load_csv(path, label_map={"g": 1.0, "b": -1.0})
    assert np.array_equal(ds.y, [1.0, -1.0])
    assert np.array_equal(ds.X, [[0.5, 1.5], [-0.5, 2.5]])


def test_load_csv_label_positions(tmp_path):
    path = tmp_path / "t.csv"
    path.write_text("9,1,2\n8,3,4\n")
    first = load_csv(path, label_col=0)
    assert np.array_equal(first.y, [9.0, 8.0])
    assert np.array_equal(first.X, [[1.0, 2.0], [3.0, 4.0]])
    mid = load_csv(path, label_col=1)
    assert np.array_equal(mid.y, [1.0, 3.0])
    assert np.array_equal(mid.X, [[9.0, 2.0], [8.0, 4.0]])


def test_load_csv_no_label_column(tmp_path):
    path = tmp_path / "t.csv"
    path.write_text("1,2\n3,4\n")
    ds = load_csv(path, label_col=None)
    assert np.array_equal(ds.X, [[1.0, 2.0], [3.0, 4.0]])
    assert np.array_equal(ds.y, [0.0, 0.0])


def test_load_csv_skip_header_and_blank_lines(tmp_path):
    path = tmp_path / "t.csv"
    path.write_text("a;b;label\n1;2;1\n\n3;4;-1\n")
    ds = load_csv(path, delimiter=";", skip_header=1)
    assert len(ds) == 2


def test_load_csv_errors(tmp_path):
    path = tmp_path / "t.csv"
    path.write_text("1,2,x\n")
    with pytest.raises(DataError, match="non-numeric target"):
        load_csv(path)
    with pytest.raises(DataError, match="unmapped label"):
        load_csv(path, label_map={"g": 1.0})
    path.write_text("1,oops,1\n")
    with pytest.raises(DataError, match="non-numeric feature"):
        load_csv(path)
    path.write_text("1,2,1\n1,2,3,1\n")
    with pytest.raises(DataError, match="expected"):
        load_csv(path)
    path.write_text("")
    with pytest.raises(DataError, match="no data rows"):
        load_csv(path)
    path.write_text("1,2\n")
    with pytest.raises(DataError, match="no column"):
        load_csv(path, label_col=5)


def test_load_libsvm(tmp_path):
    path = tmp_path / "t.svm"
    path.write_text("+1 1:0.5 3:2  # trailing comment\n-1 2:-1\n")
    ds = load_libsvm(path)
    assert np.array_equal(ds.X, [[0.5, 0.0, 2.0], [0.0, -1.0, 0.0]])
    assert np.array_equal(ds.y, [1.0, -1.0])


def test_load_libsvm_errors(tmp_path):
    path = tmp_path / "t.svm"
    path.write_text("1 0:2\n")
    with pytest.raises(DataError, match="1-based"):
        load_libsvm(path)
    path.write_text("1 nope\n")
    with pytest.raises(DataError, match="index:value"):
        load_libsvm(path)
    path.write_text("x 1:2\n")
    with pytest.raises(DataError, match="bad target"):
        load_libsvm(path)


def test_clean_collapses_duplicates_and_drops_conflicts():
    X = np.array([[0.0], [1.0], [0.0], [2.0], [2.0], [0.0]])
    y = np.array([1.0, 1.0, 1.0, 1.0, -1.0, 1.0])
    out = clean(Dataset(X, y))
    # rows with x=0 collapse to one; both x=2 rows conflict and are dropped
    assert np.array_equal(out.X, [[0.0], [1.0]])
    assert np.array_equal(out.y, [1.0, 1.0])
    assert out.duplicates_removed == 2
    assert out.conflicts_removed == 2


def test_clean_is_idempotent_including_counters():
    rng = np.random.default_rng(1)
    X = rng.integers(0, 3, (30, 2)).astype(float)
    y = np.where(rng.random(30) < 0.5, 1.0, -1.0)
    once = clean(Dataset(X, y))
    twice = clean(once)
    assert once == twice


def test_clean_regression_keeps_conflicting_targets():
    X = np.array([[0.0], [0.0], [1.0], [1.0]])
    y = np.array([1.0, 2.0, 3.0, 3.0])
    out = clean(Dataset(X, y), task="regression")
    assert np.array_equal(out.X, [[0.0], [0.0], [1.0]])
    assert np.array_equal(out.y, [1.0, 2.0, 3.0])
    assert out.duplicates_removed == 1
    assert out.conflicts_removed == 0


def test_clean_can_empty_a_dataset():
    ds = Dataset(np.zeros((2, 1)), np.array([1.0, -1.0]))
    out = clean(ds)
    assert len(out) == 0
    assert out.conflicts_removed == 2


def test_clean_rejects_unknown_task():
    with pytest.raises(DataError):
        clean(Dataset(np.zeros((1, 1)), np.zeros(1)), task="clustering")


def test_shuffle_is_seeded_permutation():
    ds = Dataset(np.arange(10.0)[:, None], np.arange(10.0))
    a = shuffle(ds, 123)
    b = shuffle(ds, 123)
    assert np.array_equal(a.X, b.X)
    assert sorted(a.y.tolist()) == sorted(ds.y.tolist())
    assert not np.array_equal(a.y, ds.y)


@given(st.integers(2, 60), st.integers(2, 10), st.integers(0, 5))
def test_kfold_partitions(n, k, seed):
    if k > n:
        with pytest.raises(DataError):
            kfold(n, k, seed)
        return
    fa = kfold(n, k, seed)
    sizes = [len(fa.test_indices(f)) for f in range(k)]
    assert sum(sizes) == n
    assert max(sizes) - min(sizes) <= 1
    seen = np.concatenate([fa.test_indices(f) for f in range(k)])
    assert sorted(seen.tolist()) == list(range(n))
    for f in range(k):
        tr = set(fa.train_indices(f).tolist())
        te = set(fa.test_indices(f).tolist())
        assert not tr & te
        assert tr | te == set(range(n))


def test_kfold_seeded_and_unseeded():
    assert np.array_equal(kfold(11, 3, 7).fold_of, kfold(11, 3, 7).fold_of)
    plain = kfold(6, 3).fold_of
    assert np.array_equal(plain, [0, 0, 1, 1, 2, 2])


def test_standardizer():
    rng = np.random.default_rng(2)
    X = rng.normal(3.0, 2.0, (50, 3))
    X[:, 2] = 5.0  # constant column
    sc = Standardizer().fit(X)
    Z = sc.transform(X)
    assert np.allclose(Z[:, :2].mean(axis=0), 0.0, atol=1e-12)
    assert np.allclose(Z[:, :2].std(axis=0), 1.0, atol=1e-12)
    assert np.allclose(Z[:, 2], 0.0)
    assert np.array_equal(Standardizer().fit_transform(X), Z)


def test_parse_label_map():
    assert parse_label_map("g=1,b=-1") == {"g": 1.0, "b": -1.0}
    assert parse_label_map(" M = 1 , R = -1 ") == {"M": 1.0, "R": -1.0}
    with pytest.raises(DataError):
        parse_label_map("gb")
    with pytest.raises(DataError):
        parse_label_map("g=x")
    with pytest.raises(DataError):
        parse_label_map(",")
