"""
Post-hoc experiment metrics. These use ground truth (which nodes are
Byzantine) and therefore live outside the defense path.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np

from app.boosting.histogram import FeatureHistogram
from app.fedsim.defenses import coordinate_median
from app.schemas import DefenseSummary, RoundReport


def median_influence_rate(all_hists: Sequence[FeatureHistogram], honest_hists: Sequence[FeatureHistogram]) -> float:
    """Share of aggregate coordinates whose median changes once Byzantine inputs are dropped."""
    if len(all_hists) == len(honest_hists):
        return 0.0
    if not honest_hists:
        return 1.0
    changed = 0
    total = 0
    for attr in ("grad", "hess", "count"):
        with_all = coordinate_median([getattr(h, attr) for h in all_hists])
        honest_only = coordinate_median([getattr(h, attr) for h in honest_hists])
        changed += int(np.count_nonzero(with_all != honest_only))
        total += with_all.size
    return changed / total if total else 0.0


def poison_success_metric(reports: Sequence[RoundReport], defense: str) -> float:
    """
    none / zkp: accepted Byzantine updates over submitted ones (0/0 -> 0.0).
    median: mean per-round influence rate.
    """
    rows = [r for r in reports if r.defense == defense]
    if defense == "median":
        rates = [r.influence_rate for r in rows if r.influence_rate is not None]
        return float(np.mean(rates)) if rates else 0.0
    submitted = sum(r.byzantine_submitted for r in rows)
    accepted = sum(r.byzantine_accepted for r in rows)
    return accepted / submitted if submitted else 0.0


def summarize_defense(reports: Sequence[RoundReport], defense: str) -> DefenseSummary:
    rows = [r for r in reports if r.defense == defense]
    return DefenseSummary(
        defense=defense,  # type: ignore[arg-type]
        final_accuracy=rows[-1].accuracy if rows else 0.0,
        mean_agg_ms=float(np.mean([r.agg_ms for r in rows])) if rows else 0.0,
        poison_success=poison_success_metric(rows, defense),
    )
