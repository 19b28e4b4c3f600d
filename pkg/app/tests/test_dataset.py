# test_dataset.py

import numpy as np
import pytest

from app.ingestion.dataset import (
    Dataset,
    EmptyFile,
    ParseError,
    generate_synthetic,
    load_csv,
    train_test_split,
    write_csv,
)


def test_synthetic_is_deterministic():
    a = generate_synthetic(200, 5, noise=0.1, seed=9)
    b = generate_synthetic(200, 5, noise=0.1, seed=9)
    assert np.array_equal(a.features, b.features)
    assert np.array_equal(a.labels, b.labels)
    c = generate_synthetic(200, 5, noise=0.1, seed=10)
    assert not np.array_equal(a.features, c.features)


def test_synthetic_labels_follow_rule_without_noise():
    ds = generate_synthetic(500, 6, noise=0.0, seed=1)
    x = ds.features
    score = (x[:, 0] + 2) * (x[:, 1] + 2) + (x[:, 2] + 2) * (x[:, 3] + 2) + x[:, 4] ** 2
    expected = (score > 9.0).astype(int)
    assert ds.labels.tolist() == expected.tolist()


def test_synthetic_noise_flips_labels():
    clean = generate_synthetic(2000, 4, noise=0.0, seed=1)
    noisy = generate_synthetic(2000, 4, noise=1.0, seed=1)
    assert np.array_equal(noisy.labels, 1 - clean.labels)


@pytest.mark.parametrize("rows,features,noise", [(0, 4, 0.1), (10, 1, 0.1), (10, 4, 1.5)])
def test_synthetic_rejects_bad_arguments(rows, features, noise):
    with pytest.raises(ValueError):
        generate_synthetic(rows, features, noise)


def test_load_csv_example(tmp_path):
    path = tmp_path / "data.csv"
    path.write_text("1.0,0.5,-0.2\n0.0,1.1,0.3\n", encoding="utf-8")
    ds = load_csv(path)
    assert ds.n_rows == 2 and ds.n_features == 2
    assert ds.labels.tolist() == [1, 0]
    assert ds.features.tolist() == [[0.5, -0.2], [1.1, 0.3]]


def test_load_csv_skips_blank_lines_and_limits(tmp_path):
    path = tmp_path / "data.csv"
    path.write_text("1,0.5\n\n0,1.5\n1,2.5\n", encoding="utf-8")
    assert load_csv(path).n_rows == 3
    assert load_csv(path, limit_rows=2).labels.tolist() == [1, 0]


@pytest.mark.parametrize(
    "text,line",
    [
        ("2,0.5\n", 1),
        ("1,abc\n", 1),
        ("1,0.5\n0,0.1,0.2\n", 2),
        ("1,nan\n", 1),
        ("1\n", 1),
    ],
)
def test_load_csv_parse_errors(tmp_path, text, line):
    path = tmp_path / "bad.csv"
    path.write_text(text, encoding="utf-8")
    with pytest.raises(ParseError) as exc:
        load_csv(path)
    assert exc.value.line == line
    assert f"line {line}" in str(exc.value)


def test_load_csv_empty(tmp_path):
    path = tmp_path / "empty.csv"
    path.write_text("\n", encoding="utf-8")
    with pytest.raises(EmptyFile):
        load_csv(path)


def test_csv_round_trip(tmp_path):
    ds = generate_synthetic(50, 3, seed=4)
    path = tmp_path / "rt.csv"
    write_csv(ds, path)
    back = load_csv(path)
    assert np.array_equal(back.features, ds.features)
    assert np.array_equal(back.labels, ds.labels)
    raw = path.read_bytes()
    assert b"\r\n" not in raw
    assert raw.count(b"\n") == 50


def test_dataset_validation():
    with pytest.raises(ValueError):
        Dataset(np.zeros((2, 2)), np.array([0, 2]))
    with pytest.raises(ValueError):
        Dataset(np.array([[np.nan, 1.0]]), np.array([1]))
    with pytest.raises(ValueError):
        Dataset(np.zeros((3, 2)), np.array([0, 1]))


def test_train_test_split():
    ds = generate_synthetic(100, 3, seed=0)
    train, test = train_test_split(ds, 0.2, seed=5)
    assert (train.n_rows, test.n_rows) == (80, 20)
    again, _ = train_test_split(ds, 0.2, seed=5)
    assert np.array_equal(train.features, again.features)
    train, test = train_test_split(ds, 0.0, seed=5)
    assert (train.n_rows, test.n_rows) == (100, 0)
    with pytest.raises(ValueError):
        train_test_split(ds, 1.0, seed=5)
