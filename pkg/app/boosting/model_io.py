"""
Model JSON layout (stable, diff-friendly):

    {
      "learning_rate": 0.3,
      "fraction_bits": 16,
      "base_label": 1,
      "bin_edges": [[...], ...],
      "trees": [
        {"feature": 3, "bin": 12,
         "left": {"weight": "-21845"},
         "right": {...}},
        ...
      ]
    }

Leaf weights are decimal strings of the fixed-point integers.
"""
from __future__ import annotations

import json
from typing import Any

from app.boosting.binning import BinEdges
from app.boosting.tree import Ensemble, RegTree, TreeNode


def _node_to_dict(node: TreeNode) -> dict[str, Any]:
    if node.is_leaf:
        return {"weight": str(node.weight_fp or 0)}
    return {
        "feature": node.feature,
        "bin": node.bin,
        "left": _node_to_dict(node.left),  # type: ignore[arg-type]
        "right": _node_to_dict(node.right),  # type: ignore[arg-type]
    }


def _node_from_dict(d: dict[str, Any]) -> TreeNode:
    if "weight" in d:
        return TreeNode(weight_fp=int(d["weight"]))
    return TreeNode(
        feature=int(d["feature"]),
        bin=int(d["bin"]),
        left=_node_from_dict(d["left"]),
        right=_node_from_dict(d["right"]),
    )


def ensemble_to_dict(ensemble: Ensemble, edges: BinEdges) -> dict[str, Any]:
    return {
        "learning_rate": ensemble.learning_rate,
        "fraction_bits": ensemble.fraction_bits,
        "base_label": ensemble.base_label,
        "bin_edges": edges.to_lists(),
        "trees": [_node_to_dict(t.root) for t in ensemble.trees],
    }


def ensemble_to_json(ensemble: Ensemble, edges: BinEdges) -> str:
    return json.dumps(ensemble_to_dict(ensemble, edges), indent=2, sort_keys=True) + "\n"


def ensemble_from_json(text: str) -> tuple[Ensemble, BinEdges]:
    d = json.loads(text)
    edges = BinEdges.from_lists(d["bin_edges"])
    ensemble = Ensemble(
        learning_rate=float(d["learning_rate"]),
        fraction_bits=int(d["fraction_bits"]),
        base_label=int(d.get("base_label", 1)),
        trees=[RegTree(_node_from_dict(t)) for t in d["trees"]],
    )
    for tree in ensemble.trees:
        tree.validate(edges.bins_per_feature())
    return ensemble, edges
