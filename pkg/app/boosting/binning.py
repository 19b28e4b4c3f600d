from __future__ import annotations

from dataclasses import dataclass

import numpy as np

CALIBRATION_ROWS = 256


@dataclass(frozen=True)
class BinEdges:
    """Global per-feature edge table; bin(x) = number of edges < x."""
    edges: tuple[np.ndarray, ...]

    @property
    def n_features(self) -> int:
        return len(self.edges)

    @property
    def n_bins(self) -> int:
        """Padded bin count (features with fewer distinct edges leave tail bins empty)."""
        return max(len(e) for e in self.edges) + 1

    def bins_per_feature(self) -> list[int]:
        return [len(e) + 1 for e in self.edges]

    def assign(self, features: np.ndarray) -> np.ndarray:
        """(rows, F) reals -> (rows, F) bin indices, rightmost bin catches overflow."""
        x = np.asarray(features, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != self.n_features:
            raise ValueError(f"expected (rows, {self.n_features}) features, got {x.shape}")
        out = np.empty(x.shape, dtype=np.int64)
        for j, e in enumerate(self.edges):
            out[:, j] = np.searchsorted(e, x[:, j], side="left")
        return out

    def to_lists(self) -> list[list[float]]:
        return [[float(v) for v in e] for e in self.edges]

    @classmethod
    def from_lists(cls, edges: list[list[float]]) -> "BinEdges":
        arrays = tuple(np.asarray(e, dtype=np.float64) for e in edges)
        for e in arrays:
            if len(e) > 1 and not np.all(np.diff(e) > 0):
                raise ValueError("bin edges must be strictly increasing")
        return cls(arrays)


def calibration_sample(features: np.ndarray, seed: int, rows: int = CALIBRATION_ROWS) -> np.ndarray:
    """Public calibration rows the aggregator derives edges from."""
    rng = np.random.default_rng(seed)
    n = len(features)
    idx = np.sort(rng.permutation(n)[: min(rows, n)])
    return np.asarray(features)[idx]


def compute_bin_edges(sample: np.ndarray, n_bins: int = 32) -> BinEdges:
    """Per-feature quantile edges at k/n_bins, k = 1..n_bins-1, de-duplicated."""
    if n_bins < 2:
        raise ValueError("n_bins must be >= 2")
    x = np.asarray(sample, dtype=np.float64)
    qs = np.arange(1, n_bins) / n_bins
    edges = tuple(np.unique(np.quantile(x[:, j], qs)) for j in range(x.shape[1]))
    return BinEdges(edges)
