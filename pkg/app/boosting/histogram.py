"""
Per-leaf feature histograms: for every (leaf, feature, bin) the exact
fixed-point sums of g and h plus the instance count.

Merging is plain integer summation. For sufficient statistics this IS the
count-weighted average of per-node bin means, so no division ever happens
on the aggregation path and federated sums equal centralized sums exactly.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from app.boosting.loss import LossSpec


class ShapeMismatch(ValueError):
    """Histograms (or updates) with different shapes were combined."""


@dataclass
class FeatureHistogram:
    grad: np.ndarray   # int64 (leaves, features, bins)
    hess: np.ndarray
    count: np.ndarray

    @classmethod
    def zeros(cls, n_leaves: int, n_features: int, n_bins: int) -> "FeatureHistogram":
        shape = (n_leaves, n_features, n_bins)
        return cls(np.zeros(shape, np.int64), np.zeros(shape, np.int64), np.zeros(shape, np.int64))

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.grad.shape  # type: ignore[return-value]

    @property
    def n_leaves(self) -> int:
        return self.grad.shape[0]

    def leaf(self, k: int) -> "FeatureHistogram":
        return FeatureHistogram(self.grad[k : k + 1], self.hess[k : k + 1], self.count[k : k + 1])

    def leaf_totals(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Per-leaf (G, H, n) read off feature 0 (every feature sums to the same totals)."""
        return self.grad[:, 0, :].sum(axis=1), self.hess[:, 0, :].sum(axis=1), self.count[:, 0, :].sum(axis=1)

    def totals(self) -> tuple[int, int, int]:
        g, h, n = self.leaf_totals()
        return int(g.sum()), int(h.sum()), int(n.sum())

    def copy(self) -> "FeatureHistogram":
        return FeatureHistogram(self.grad.copy(), self.hess.copy(), self.count.copy())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FeatureHistogram):
            return NotImplemented
        return (
            self.shape == other.shape
            and np.array_equal(self.grad, other.grad)
            and np.array_equal(self.hess, other.hess)
            and np.array_equal(self.count, other.count)
        )


def histogram_from_gradients(
    bins: np.ndarray,
    leaf_index: np.ndarray,
    g_fp: np.ndarray,
    h_fp: np.ndarray,
    n_leaves: int,
    n_bins: int,
) -> FeatureHistogram:
    bins = np.asarray(bins, dtype=np.int64)
    n_rows, n_features = bins.shape if bins.ndim == 2 else (0, 0)
    hist = FeatureHistogram.zeros(n_leaves, n_features, n_bins)
    if n_rows == 0:
        return hist
    leaf_index = np.asarray(leaf_index, dtype=np.int64)
    g_fp = np.asarray(g_fp, dtype=np.int64)
    h_fp = np.asarray(h_fp, dtype=np.int64)
    ones = np.ones(n_rows, dtype=np.int64)
    for j in range(n_features):
        np.add.at(hist.grad[:, j, :], (leaf_index, bins[:, j]), g_fp)
        np.add.at(hist.hess[:, j, :], (leaf_index, bins[:, j]), h_fp)
        np.add.at(hist.count[:, j, :], (leaf_index, bins[:, j]), ones)
    return hist


def build_histogram(
    bins: np.ndarray,
    labels: np.ndarray,
    margins_fp: np.ndarray,
    leaf_index: np.ndarray,
    n_leaves: int,
    n_bins: int,
    loss: LossSpec,
) -> FeatureHistogram:
    """Histogram of surrogate gradients for a shard (labels in {-1, +1})."""
    if len(labels) == 0:
        n_features = bins.shape[1] if np.ndim(bins) == 2 else 0
        return FeatureHistogram.zeros(n_leaves, n_features, n_bins)
    g, h = loss.gradients_fp_array(labels, margins_fp)
    return histogram_from_gradients(bins, leaf_index, g, h, n_leaves, n_bins)


def merge_histograms(hists: Sequence[FeatureHistogram]) -> FeatureHistogram:
    if not hists:
        raise ValueError("nothing to merge")
    shape = hists[0].shape
    out = hists[0].copy()
    for other in hists[1:]:
        if other.shape != shape:
            raise ShapeMismatch(f"cannot merge {other.shape} into {shape}")
        out.grad += other.grad
        out.hess += other.hess
        out.count += other.count
    return out
