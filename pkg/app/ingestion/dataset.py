# app/ingestion/dataset.py
from __future__ import annotations

import csv
import math
import pathlib
from dataclasses import dataclass

import numpy as np

# -----------------------------------------------------------------------------
# Errors & types
# -----------------------------------------------------------------------------


class ParseError(ValueError):
    """Malformed CSV row; `line` is 1-based."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class EmptyFile(ValueError):
    """CSV file without any data row."""


@dataclass(frozen=True, eq=False)
class Dataset:
    features: np.ndarray   # float64 (rows, F)
    labels: np.ndarray     # int64 in {0, 1}
    provenance: str = ""

    def __post_init__(self) -> None:
        x = np.asarray(self.features, dtype=np.float64)
        y = np.asarray(self.labels, dtype=np.int64)
        if x.ndim != 2:
            raise ValueError("features must be a 2-D matrix")
        if len(y) != len(x):
            raise ValueError(f"{len(y)} labels for {len(x)} rows")
        if not np.isfinite(x).all():
            raise ValueError("features contain missing or non-finite values")
        if len(y) and not np.isin(y, (0, 1)).all():
            raise ValueError("labels must be 0 or 1")
        object.__setattr__(self, "features", x)
        object.__setattr__(self, "labels", y)

    @property
    def n_rows(self) -> int:
        return len(self.labels)

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def take(self, idx: np.ndarray) -> "Dataset":
        return Dataset(self.features[idx], self.labels[idx], self.provenance)


# -----------------------------------------------------------------------------
# Synthetic data
# -----------------------------------------------------------------------------

# score = (x0+s)(x1+s) + (x2+s)(x3+s) + x4^2; its mean 2s^2 + 1 is the threshold
SCORE_SHIFT = 2.0
SCORE_THRESHOLD = 2 * SCORE_SHIFT**2 + 1.0


def generate_synthetic(n_rows: int, n_features: int = 10, noise: float = 0.05, seed: int = 0) -> Dataset:
    """
    Gaussian features; label = [(x0+2)(x1+2) + (x2+2)(x3+2) + x4^2 - 9 > 0],
    then each label flipped with probability `noise`. Feature indices wrap
    modulo n_features. The shifted products give each score feature a main effect.
    """
    if n_rows < 1 or n_features < 2:
        raise ValueError("need n_rows >= 1 and n_features >= 2")
    if not 0.0 <= noise <= 1.0:
        raise ValueError("noise must be in [0, 1]")
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n_rows, n_features))
    c = [k % n_features for k in range(5)]
    s = SCORE_SHIFT
    score = (x[:, c[0]] + s) * (x[:, c[1]] + s) + (x[:, c[2]] + s) * (x[:, c[3]] + s) + x[:, c[4]] ** 2
    labels = (score > SCORE_THRESHOLD).astype(np.int64)
    flips = rng.random(n_rows) < noise
    labels[flips] ^= 1
    return Dataset(x, labels, provenance=f"synthetic(seed={seed})")


def train_test_split(ds: Dataset, test_fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    """Seeded held-out split; test_fraction = 0 gives an empty test set."""
    if not 0.0 <= test_fraction < 1.0:
        raise ValueError("test_fraction must be in [0, 1)")
    perm = np.random.default_rng(seed).permutation(ds.n_rows)
    n_test = int(round(ds.n_rows * test_fraction))
    return ds.take(np.sort(perm[n_test:])), ds.take(np.sort(perm[:n_test]))


# -----------------------------------------------------------------------------
# CSV (UTF-8, no header, label first, LF)
# -----------------------------------------------------------------------------


def write_csv(ds: Dataset, path: str | pathlib.Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        for label, row in zip(ds.labels.tolist(), ds.features.tolist()):
            writer.writerow([str(label)] + [repr(v) for v in row])


def _parse_float(text: str, line: int, col: int) -> float:
    try:
        v = float(text)
    except ValueError:
        raise ParseError(line, f"field {col} is not a decimal number: {text!r}") from None
    if not math.isfinite(v):
        raise ParseError(line, f"field {col} is not finite: {text!r}")
    return v


def load_csv(path: str | pathlib.Path, limit_rows: int | None = None) -> Dataset:
    rows: list[list[float]] = []
    labels: list[int] = []
    width = None
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for line_no, record in enumerate(csv.reader(fh), start=1):
            if limit_rows is not None and len(rows) >= limit_rows:
                break
            if not record or all(not f.strip() for f in record):
                continue
            if len(record) < 2:
                raise ParseError(line_no, "expected a label and at least one feature")
            if width is None:
                width = len(record)
            elif len(record) != width:
                raise ParseError(line_no, f"expected {width} fields, got {len(record)}")
            label = _parse_float(record[0], line_no, 1)
            if label not in (0.0, 1.0):
                raise ParseError(line_no, f"label must be 0 or 1, got {record[0]!r}")
            labels.append(int(label))
            rows.append([_parse_float(f, line_no, i) for i, f in enumerate(record[1:], start=2)])
    if not rows:
        raise EmptyFile(f"{path}: no data rows")
    return Dataset(np.array(rows, dtype=np.float64), np.array(labels, dtype=np.int64), provenance=str(path))
