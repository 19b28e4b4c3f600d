"""
Aggregator-side defenses.

Every defense splits into a per-update `check` (run on the verification
workers) and an `aggregate` over the accepted updates (single-threaded,
ascending node id). Nothing here reads a node's honesty or the `forged`
flag: decisions depend only on proofs, public inputs and histograms.
"""
from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from app.boosting.histogram import FeatureHistogram, ShapeMismatch, merge_histograms
from app.crypto.finite_field import to_signed
from app.crypto.snark import CommonReferenceString, verify
from app.fedsim.node import NodeUpdate

logger = logging.getLogger(__name__)


@dataclass
class DefenseResult:
    accepted: list[int]
    rejected: list[int]
    aggregate: FeatureHistogram


def public_linear_check(update: NodeUpdate) -> bool:
    """Per feature, bin sums over all leaves must equal the public totals exactly."""
    g_tot, h_tot, n = (to_signed(v) for v in update.public_inputs)
    hist = update.histograms
    g = hist.grad.sum(axis=(0, 2))
    h = hist.hess.sum(axis=(0, 2))
    c = hist.count.sum(axis=(0, 2))
    return bool(np.all(g == g_tot) and np.all(h == h_tot) and np.all(c == n))


def coordinate_median(arrays: Sequence[np.ndarray]) -> np.ndarray:
    return np.median(np.stack(arrays), axis=0)


def _shape_of(updates: Sequence[NodeUpdate]) -> tuple[int, int, int]:
    if not updates:
        raise ValueError("no updates to aggregate")
    shape = updates[0].histograms.shape
    for u in updates[1:]:
        if u.histograms.shape != shape:
            raise ShapeMismatch(f"node {u.node_id} sent {u.histograms.shape}, expected {shape}")
    return shape


class Defense(ABC):
    name: str

    def check(self, update: NodeUpdate) -> bool:
        return True

    @abstractmethod
    def aggregate(self, accepted: Sequence[NodeUpdate]) -> FeatureHistogram:
        ...

    def decide(self, updates: Sequence[NodeUpdate], verdicts: Sequence[bool]) -> DefenseResult:
        """Combine per-update verdicts (any order) into a result merged in ascending node id."""
        shape = _shape_of(updates)
        pairs = sorted(zip(updates, verdicts), key=lambda p: p[0].node_id)
        accepted = [u for u, ok in pairs if ok]
        rejected = [u.node_id for u, ok in pairs if not ok]
        aggregate = self.aggregate(accepted) if accepted else FeatureHistogram.zeros(*shape)
        if rejected:
            logger.debug("%s: rejected %s", self.name, rejected)
        return DefenseResult([u.node_id for u in accepted], rejected, aggregate)

    def apply(self, updates: Sequence[NodeUpdate]) -> DefenseResult:
        """Reference sequential schedule."""
        return self.decide(updates, [self.check(u) for u in updates])


class NoDefense(Defense):
    name = "none"

    def aggregate(self, accepted: Sequence[NodeUpdate]) -> FeatureHistogram:
        return merge_histograms([u.histograms for u in accepted])


class MedianDefense(Defense):
    """Coordinate-wise median of per-node histograms, rescaled by the node count."""
    name = "median"

    def aggregate(self, accepted: Sequence[NodeUpdate]) -> FeatureHistogram:
        n = len(accepted)

        def robust(arrays: list[np.ndarray]) -> np.ndarray:
            return np.rint(coordinate_median(arrays) * n).astype(np.int64)

        return FeatureHistogram(
            robust([u.histograms.grad for u in accepted]),
            robust([u.histograms.hess for u in accepted]),
            robust([u.histograms.count for u in accepted]),
        )


class ZkpDefense(Defense):
    """Accept exactly the updates whose proof verifies and whose histograms match the proven totals."""
    name = "zkp"

    def __init__(self, crs: CommonReferenceString) -> None:
        self.crs = crs

    def check(self, update: NodeUpdate) -> bool:
        if update.proof is None:
            return False
        return verify(self.crs, update.public_inputs, update.proof) and public_linear_check(update)

    def aggregate(self, accepted: Sequence[NodeUpdate]) -> FeatureHistogram:
        return merge_histograms([u.histograms for u in accepted])


def defense_none(updates: Sequence[NodeUpdate]) -> DefenseResult:
    return NoDefense().apply(updates)


def defense_median(updates: Sequence[NodeUpdate]) -> DefenseResult:
    return MedianDefense().apply(updates)


def defense_zkp(updates: Sequence[NodeUpdate], crs: CommonReferenceString) -> DefenseResult:
    return ZkpDefense(crs).apply(updates)


def make_defense(name: str, crs: CommonReferenceString | None = None) -> Defense:
    if name == "none":
        return NoDefense()
    if name == "median":
        return MedianDefense()
    if name == "zkp":
        if crs is None:
            raise ValueError("the zkp defense needs a CRS")
        return ZkpDefense(crs)
    raise ValueError(f"unknown defense {name!r}")
