from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np

from app.boosting.histogram import histogram_from_gradients
from app.boosting.loss import LossSpec
from app.boosting.tree import Ensemble, RegTree, grow_tree, majority_label

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BoostingParams:
    rounds: int = 20
    depth: int = 3
    reg_lambda: float = 1.0
    gamma: float = 0.0
    learning_rate: float = 0.3


def to_signed_labels(labels01: np.ndarray) -> np.ndarray:
    """{0, 1} on disk -> {-1, +1} internally."""
    return 2 * np.asarray(labels01, dtype=np.int64) - 1


def train_centralized(
    bins: np.ndarray,
    labels01: np.ndarray,
    loss: LossSpec,
    params: BoostingParams,
    n_bins: int,
    on_round: Callable[[int, Ensemble], None] | None = None,
) -> Ensemble:
    """Reference trainer on pooled rows: same gradients, histograms and growth as the federated path."""
    y = to_signed_labels(labels01)
    margins = np.zeros(len(y), dtype=np.int64)
    ensemble = Ensemble(params.learning_rate, loss.fraction_bits, majority_label(labels01))

    for t in range(params.rounds):
        g, h = loss.gradients_fp_array(y, margins)

        def source(tree: RegTree, level: int):
            return histogram_from_gradients(bins, tree.assign_leaves(bins), g, h, len(tree.leaves()), n_bins)

        tree = grow_tree(source, params.depth, params.reg_lambda, params.gamma, loss.fraction_bits)
        margins += ensemble.tree_increment_fp(tree, bins)
        ensemble.trees.append(tree)
        logger.debug("centralized round %d: leaves=%d", t + 1, len(tree.leaves()))
        if on_round is not None:
            on_round(t + 1, ensemble)
    return ensemble
