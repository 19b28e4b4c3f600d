"""
Edge node state and the update it ships to the aggregator.

A node owns its shard (binned features, labels in {-1, +1}, fixed-point
margins). Once per round it fixes its per-instance gradient statistics and
public totals (and, under the zkp defense, a proof over them); at every tree
level it then ships histograms of those statistics for ALL current leaves.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from app.boosting.histogram import FeatureHistogram, histogram_from_gradients
from app.boosting.loss import LossSpec
from app.boosting.tree import RegTree
from app.crypto.finite_field import P
from app.crypto.snark import Proof


@dataclass(frozen=True)
class Honesty:
    byzantine: bool = False
    kappa: float = 10.0
    invert: bool = True


HONEST = Honesty()


@dataclass
class NodeUpdate:
    node_id: int
    round: int
    level: int
    histograms: FeatureHistogram
    public_inputs: tuple[int, int, int]  # canonical field values [G_total, H_total, n_count]
    proof: Proof | None = None
    # test visibility only; defenses never read it
    forged: bool = False


@dataclass
class RoundStatistics:
    """Per-instance statistics a node commits to for one round."""
    g_fp: np.ndarray
    h_fp: np.ndarray
    public_inputs: tuple[int, int, int]
    proof: Proof | None = None
    forged: bool = False


@dataclass
class NodeState:
    id: int
    bins: np.ndarray        # (rows, F) bin indices
    labels: np.ndarray      # {-1, +1}
    margins_fp: np.ndarray  # int64
    honesty: Honesty = HONEST
    stats: RoundStatistics | None = field(default=None, repr=False)

    @property
    def n_instances(self) -> int:
        return len(self.labels)

    def honest_gradients(self, loss: LossSpec) -> tuple[np.ndarray, np.ndarray]:
        return loss.gradients_fp_array(self.labels, self.margins_fp)

    def shard_pairs(self, fraction_bits: int) -> list[tuple[int, float]]:
        """(label, real margin) pairs for witness synthesis; decoding is exact."""
        scale = float(1 << fraction_bits)
        return [(int(y), int(m) / scale) for y, m in zip(self.labels, self.margins_fp)]

    def histograms(self, tree: RegTree, n_bins: int) -> FeatureHistogram:
        if self.stats is None:
            raise RuntimeError(f"node {self.id} has no statistics for this round")
        leaf_index = tree.assign_leaves(self.bins)
        return histogram_from_gradients(
            self.bins, leaf_index, self.stats.g_fp, self.stats.h_fp, len(tree.leaves()), n_bins
        )

    def make_update(self, round_no: int, level: int, tree: RegTree, n_bins: int) -> NodeUpdate:
        return NodeUpdate(
            node_id=self.id,
            round=round_no,
            level=level,
            histograms=self.histograms(tree, n_bins),
            public_inputs=self.stats.public_inputs,  # type: ignore[union-attr]
            proof=self.stats.proof,  # type: ignore[union-attr]
            forged=self.stats.forged,  # type: ignore[union-attr]
        )

    def apply_tree(self, increments_fp: np.ndarray) -> None:
        self.margins_fp = self.margins_fp + increments_fp
        self.stats = None


def public_totals(g_fp: np.ndarray, h_fp: np.ndarray) -> tuple[int, int, int]:
    """Canonical [G_total, H_total, n_count] (negatives as p - |x|)."""
    return int(g_fp.sum()) % P, int(h_fp.sum()) % P, len(g_fp)
