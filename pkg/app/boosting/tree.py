"""
Second-order split search, level-wise tree growth and ensemble prediction.

    gain(L, R) = 1/2 * [G_L^2/(H_L+lambda) + G_R^2/(H_R+lambda)
                        - (G_L+G_R)^2/(H_L+H_R+lambda)] - gamma
    w* = -G / (H + lambda)

Statistics arrive as fixed-point integers and are converted to reals only
inside these two formulas, the same way on every path.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Iterator

import numpy as np

from app.boosting.histogram import FeatureHistogram
from app.utils.fixed_point import decode

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SplitCandidate:
    feature: int
    bin: int            # bins <= bin go left
    gain: float
    left: tuple[int, int, int]   # (G_fp, H_fp, count)
    right: tuple[int, int, int]


def split_gain(g_l: float, h_l: float, g_r: float, h_r: float, lam: float, gamma: float) -> float:
    return 0.5 * (g_l * g_l / (h_l + lam) + g_r * g_r / (h_r + lam) - (g_l + g_r) ** 2 / (h_l + h_r + lam)) - gamma


def best_split(
    hist: FeatureHistogram, lam: float, gamma: float, fraction_bits: int, leaf: int = 0
) -> SplitCandidate | None:
    """Best (feature, bin) by prefix-sum scan; ties go to the lower feature, then the lower bin."""
    scale = float(1 << fraction_bits)
    grad, hess, count = hist.grad[leaf], hist.hess[leaf], hist.count[leaf]
    n_bins = grad.shape[1]
    if n_bins < 2:
        return None
    gl_fp = np.cumsum(grad, axis=1)[:, :-1]
    hl_fp = np.cumsum(hess, axis=1)[:, :-1]
    nl = np.cumsum(count, axis=1)[:, :-1]
    g_tot, h_tot = grad.sum(axis=1, keepdims=True), hess.sum(axis=1, keepdims=True)

    g_l, h_l = gl_fp / scale, hl_fp / scale
    g_r, h_r = (g_tot - gl_fp) / scale, (h_tot - hl_fp) / scale
    # with lambda = 0 an empty side has a zero denominator; such boundaries never win
    valid = (h_l + lam > 0) & (h_r + lam > 0) & (h_l + h_r + lam > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        gains = 0.5 * (g_l**2 / (h_l + lam) + g_r**2 / (h_r + lam) - (g_l + g_r) ** 2 / (h_l + h_r + lam)) - gamma
    gains = np.where(valid, gains, -np.inf)

    flat = int(np.argmax(gains))
    j, k = divmod(flat, n_bins - 1)
    best = float(gains[j, k])
    if not best > 0.0:
        return None
    n_tot = int(count[j].sum())
    return SplitCandidate(
        feature=j,
        bin=k,
        gain=best,
        left=(int(gl_fp[j, k]), int(hl_fp[j, k]), int(nl[j, k])),
        right=(int(g_tot[j, 0] - gl_fp[j, k]), int(h_tot[j, 0] - hl_fp[j, k]), n_tot - int(nl[j, k])),
    )


def leaf_weight(g: float, h: float, lam: float) -> float:
    """w* = -G / (H + lambda); 0 for a leaf with no curvature (H + lambda <= 0)."""
    if h + lam <= 0:
        return 0.0
    return -g / (h + lam)


def leaf_weight_fp(g_fp: int, h_fp: int, lam: float, fraction_bits: int) -> int:
    w = leaf_weight(decode(g_fp, fraction_bits), decode(h_fp, fraction_bits), lam)
    return int(round(w * (1 << fraction_bits)))


# ----------------------------------------------------------------------
# Trees
# ----------------------------------------------------------------------
@dataclass(eq=False)
class TreeNode:
    feature: int | None = None
    bin: int | None = None
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None
    weight_fp: int | None = None
    # aggregated statistics seen when the node was a leaf
    grad_sum: int = 0
    hess_sum: int = 0
    count: int = 0

    @property
    def is_leaf(self) -> bool:
        return self.left is None


@dataclass(eq=False)
class RegTree:
    root: TreeNode = field(default_factory=TreeNode)

    def leaves(self) -> list[TreeNode]:
        """Leaves in canonical (left-first depth-first) order."""
        return list(self._walk_leaves(self.root))

    def _walk_leaves(self, node: TreeNode) -> Iterator[TreeNode]:
        if node.is_leaf:
            yield node
        else:
            yield from self._walk_leaves(node.left)  # type: ignore[arg-type]
            yield from self._walk_leaves(node.right)  # type: ignore[arg-type]

    def depth(self) -> int:
        def d(node: TreeNode) -> int:
            return 0 if node.is_leaf else 1 + max(d(node.left), d(node.right))  # type: ignore[arg-type]

        return d(self.root)

    def assign_leaves(self, bins: np.ndarray) -> np.ndarray:
        """Canonical leaf index of every row of a (rows, F) bin matrix."""
        bins = np.asarray(bins)
        out = np.zeros(len(bins), dtype=np.int64)
        counter = 0

        def route(node: TreeNode, mask: np.ndarray) -> None:
            nonlocal counter
            if node.is_leaf:
                out[mask] = counter
                counter += 1
                return
            go_left = bins[:, node.feature] <= node.bin
            route(node.left, mask & go_left)  # type: ignore[arg-type]
            route(node.right, mask & ~go_left)  # type: ignore[arg-type]

        route(self.root, np.ones(len(bins), dtype=bool))
        return out

    def predict_fp(self, bins: np.ndarray) -> np.ndarray:
        weights = np.array([leaf.weight_fp or 0 for leaf in self.leaves()], dtype=np.int64)
        return weights[self.assign_leaves(bins)]

    def validate(self, bins_per_feature: list[int]) -> None:
        """Every split threshold must be a real bin of its feature."""
        stack = [self.root]
        while stack:
            node = stack.pop()
            if node.is_leaf:
                continue
            if not 0 <= node.bin < bins_per_feature[node.feature]:  # type: ignore[index,operator]
                raise ValueError(f"threshold {node.bin} out of range for feature {node.feature}")
            stack += [node.left, node.right]  # type: ignore[list-item]


HistogramSource = Callable[[RegTree, int], FeatureHistogram]


def grow_tree(
    histogram_source: HistogramSource,
    depth_max: int,
    lam: float,
    gamma: float,
    fraction_bits: int,
) -> RegTree:
    """
    Level-wise growth. At each level `histogram_source(tree, level)` returns
    the aggregated histograms of ALL current leaves (canonical order); leaves
    at the frontier are split with `best_split`, children take their totals
    from the parent's prefix sums, and leaves that stop get w* as weight.
    """
    if depth_max < 1:
        raise ValueError("depth_max must be >= 1")
    tree = RegTree()
    frontier = {id(tree.root)}
    for level in range(depth_max):
        leaves = tree.leaves()
        hist = histogram_source(tree, level)
        if hist.n_leaves != len(leaves):
            raise ValueError(f"histogram source returned {hist.n_leaves} leaves, tree has {len(leaves)}")
        g_tot, h_tot, n_tot = hist.leaf_totals()
        next_frontier: set[int] = set()
        for k, node in enumerate(leaves):
            if id(node) not in frontier:
                continue
            node.grad_sum, node.hess_sum, node.count = int(g_tot[k]), int(h_tot[k]), int(n_tot[k])
            cand = best_split(hist, lam, gamma, fraction_bits, leaf=k)
            if cand is None:
                continue
            node.feature, node.bin = cand.feature, cand.bin
            node.left = TreeNode(grad_sum=cand.left[0], hess_sum=cand.left[1], count=cand.left[2])
            node.right = TreeNode(grad_sum=cand.right[0], hess_sum=cand.right[1], count=cand.right[2])
            next_frontier |= {id(node.left), id(node.right)}
        frontier = next_frontier
        if not frontier:
            break
    for leaf in tree.leaves():
        leaf.weight_fp = leaf_weight_fp(leaf.grad_sum, leaf.hess_sum, lam, fraction_bits)
    logger.debug("grow_tree: depth=%d leaves=%d", tree.depth(), len(tree.leaves()))
    return tree


# ----------------------------------------------------------------------
# Ensemble
# ----------------------------------------------------------------------
@dataclass(eq=False)
class Ensemble:
    learning_rate: float
    fraction_bits: int
    base_label: int = 1  # predicted class for an exactly-zero margin (majority training label)
    trees: list[RegTree] = field(default_factory=list)

    def tree_increment_fp(self, tree: RegTree, bins: np.ndarray) -> np.ndarray:
        """round(eta * w_fp) per row; the margin update every path applies."""
        steps = np.array(
            [int(round(self.learning_rate * (leaf.weight_fp or 0))) for leaf in tree.leaves()], dtype=np.int64
        )
        return steps[tree.assign_leaves(bins)]

    def predict_margin_fp(self, bins: np.ndarray) -> np.ndarray:
        margin = np.zeros(len(bins), dtype=np.int64)
        for tree in self.trees:
            margin += self.tree_increment_fp(tree, bins)
        return margin

    def predict(self, bins: np.ndarray) -> np.ndarray:
        """Margins as reals."""
        return self.predict_margin_fp(bins) / float(1 << self.fraction_bits)

    def predict_labels(self, bins: np.ndarray) -> np.ndarray:
        return labels_from_margins(self.predict_margin_fp(bins), self.base_label)


def labels_from_margins(margins: np.ndarray, base_label: int = 1) -> np.ndarray:
    m = np.asarray(margins)
    return np.where(m > 0, 1, np.where(m < 0, 0, base_label)).astype(np.int64)


def metrics(margins: np.ndarray, labels: np.ndarray, base_label: int = 1) -> tuple[float, float]:
    """(accuracy, logloss) of real margins against {0, 1} labels."""
    labels = np.asarray(labels, dtype=np.int64)
    if len(labels) == 0:
        return 0.0, 0.0
    m = np.asarray(margins, dtype=np.float64)
    acc = float(np.mean(labels_from_margins(m, base_label) == labels))
    # -log s(m) for y = 1, -log s(-m) for y = 0
    signed = np.where(labels == 1, m, -m)
    logloss = float(np.mean(np.logaddexp(0.0, -signed)))
    return acc, logloss


def majority_label(labels: np.ndarray) -> int:
    labels = np.asarray(labels)
    return 1 if 2 * int(np.sum(labels == 1)) >= len(labels) else 0
