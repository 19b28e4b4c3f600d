from __future__ import annotations

import csv
import json
import pathlib
from typing import Sequence

from app.schemas import RoundReport, RunSummary

ROUND_COLUMNS = ("round", "defense", "accepted", "rejected", "accuracy", "agg_ms")

_LABELS = {
    "none": "No defense",
    "median": "Median aggregation",
    "zkp": "zk-SNARK verification",
}


# -----------------------------------------------------------------------------
# Files
# -----------------------------------------------------------------------------
def write_rounds_csv(path: str | pathlib.Path, reports: Sequence[RoundReport]) -> None:
    """One line per (defense, round); accepted/rejected are node counts."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(ROUND_COLUMNS)
        for r in reports:
            writer.writerow(
                [r.round, r.defense, len(r.accepted), len(r.rejected), f"{r.accuracy:.6f}", f"{r.agg_ms:.3f}"]
            )


def summary_to_json(summary: RunSummary) -> str:
    return json.dumps(summary.model_dump(), indent=2, sort_keys=True) + "\n"


def write_summary_json(path: str | pathlib.Path, summary: RunSummary) -> None:
    pathlib.Path(path).write_text(summary_to_json(summary), encoding="utf-8")


def read_summary_json(path: str | pathlib.Path) -> RunSummary:
    return RunSummary.model_validate_json(pathlib.Path(path).read_text(encoding="utf-8"))


# -----------------------------------------------------------------------------
# Table
# -----------------------------------------------------------------------------
def format_table(summary: RunSummary) -> str:
    """Human-readable table: final accuracy, aggregation time per round, poison success."""
    header = f"{'Defense mechanism':<24} {'Final accuracy':>15} {'Agg. time / round':>18} {'Poison success':>15}"
    lines = [header, "-" * len(header)]
    for rec in summary.records:
        lines.append(
            f"{_LABELS.get(rec.defense, rec.defense):<24} "
            f"{rec.final_accuracy * 100:>14.1f}% "
            f"{rec.mean_agg_ms:>15.1f} ms "
            f"{rec.poison_success * 100:>14.1f}%"
        )
    lines.append(
        f"pristine accuracy {summary.pristine_accuracy * 100:.1f}% | nodes {summary.n_nodes} "
        f"x {summary.instances_per_node} rows | byzantine {summary.byzantine_nodes}"
    )
    return "\n".join(lines)
