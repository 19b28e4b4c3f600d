# test_tree.py

import json

import numpy as np
import pytest

from app.boosting.binning import calibration_sample, compute_bin_edges
from app.boosting.histogram import FeatureHistogram
from app.boosting.model_io import ensemble_from_json, ensemble_to_dict, ensemble_to_json
from app.boosting.trainer import BoostingParams, to_signed_labels, train_centralized
from app.boosting.tree import (
    Ensemble,
    RegTree,
    TreeNode,
    best_split,
    grow_tree,
    labels_from_margins,
    leaf_weight,
    leaf_weight_fp,
    majority_label,
    metrics,
    split_gain,
)
from app.ingestion.dataset import generate_synthetic, train_test_split

F = 16


def _two_bin_hist():
    return FeatureHistogram(
        np.array([[[-2 << F, 1 << F]]]),
        np.array([[[3 << F, 2 << F]]]),
        np.array([[[3, 2]]]),
    )


# ------------------------
# Gain / weights
# ------------------------
def test_split_gain_example():
    assert split_gain(-2, 3, 1, 2, 1, 0) == pytest.approx(0.58333, abs=1e-5)


def test_leaf_weight_example():
    assert leaf_weight(-2, 3, 1) == pytest.approx(0.5)
    assert leaf_weight_fp(-2 << F, 3 << F, 1.0, F) == 1 << (F - 1)


def test_best_split_example():
    cand = best_split(_two_bin_hist(), lam=1.0, gamma=0.0, fraction_bits=F)
    assert (cand.feature, cand.bin) == (0, 0)
    assert cand.gain == pytest.approx(0.58333, abs=1e-5)
    assert cand.left == (-2 << F, 3 << F, 3)
    assert cand.right == (1 << F, 2 << F, 2)


def test_gamma_can_veto_split():
    assert best_split(_two_bin_hist(), lam=1.0, gamma=1.0, fraction_bits=F) is None


def test_zero_histogram_has_no_split():
    assert best_split(FeatureHistogram.zeros(1, 3, 8), 1.0, 0.0, F) is None


def test_single_bin_has_no_split():
    assert best_split(FeatureHistogram.zeros(1, 2, 1), 1.0, 0.0, F) is None


def _empty_leading_bin():
    return FeatureHistogram(
        np.array([[[0, -1 << F, 1 << F]]]),
        np.array([[[0, 1 << F, 1 << F]]]),
        np.array([[[0, 1, 1]]]),
    )


def test_unregularized_split_skips_empty_side():
    cand = best_split(_empty_leading_bin(), lam=0.0, gamma=0.0, fraction_bits=F)
    assert (cand.feature, cand.bin) == (0, 1)
    assert cand.gain == pytest.approx(1.0)
    assert cand.left == (-1 << F, 1 << F, 1)


@pytest.mark.parametrize("g,h", [(0, 0), (3, 0), (-2, 0)])
def test_leaf_weight_without_curvature_is_zero(g, h):
    assert leaf_weight(g, h, 0.0) == 0.0
    assert leaf_weight_fp(g << F, h << F, 0.0, F) == 0


def _oracle(hist, lam):
    best = None
    grad, hess = hist.grad[0], hist.hess[0]
    for j in range(grad.shape[0]):
        g_tot, h_tot = int(grad[j].sum()), int(hess[j].sum())
        for k in range(grad.shape[1] - 1):
            gl, hl = int(grad[j, : k + 1].sum()), int(hess[j, : k + 1].sum())
            gain = split_gain(gl / 2**F, hl / 2**F, (g_tot - gl) / 2**F, (h_tot - hl) / 2**F, lam, 0.0)
            if best is None or gain > best[2]:
                best = (j, k, gain)
    return best


def test_best_split_matches_brute_force():
    rng = np.random.default_rng(17)
    for _ in range(100):
        hist = FeatureHistogram(
            rng.integers(-(4 << F), 4 << F, size=(1, 2, 4)),
            rng.integers(0, 4 << F, size=(1, 2, 4)),
            rng.integers(1, 10, size=(1, 2, 4)),
        )
        j, k, gain = _oracle(hist, 1.0)
        cand = best_split(hist, 1.0, 0.0, F)
        if gain > 0:
            assert (cand.feature, cand.bin) == (j, k)
            assert cand.gain == pytest.approx(gain)
        else:
            assert cand is None


# ------------------------
# Trees
# ------------------------
@pytest.mark.parametrize("lam", [1.0, 0.0])
def test_grow_without_gain_is_single_leaf(lam):
    tree = grow_tree(lambda t, level: FeatureHistogram.zeros(len(t.leaves()), 2, 4), 3, lam, 0.0, F)
    assert tree.depth() == 0
    assert tree.leaves()[0].weight_fp == 0


def test_unregularized_training_with_empty_bins(loss_spec):
    bins = np.tile([[1], [2]], (10, 1))
    labels = np.tile([0, 1], 10)
    ens = train_centralized(bins, labels, loss_spec, BoostingParams(rounds=2, depth=2, reg_lambda=0.0), n_bins=3)
    root = ens.trees[0].root
    assert (root.feature, root.bin) == (0, 1)
    assert ens.predict_labels(bins).tolist() == labels.tolist()


def test_grow_rejects_bad_depth():
    with pytest.raises(ValueError):
        grow_tree(lambda t, level: FeatureHistogram.zeros(1, 1, 2), 0, 1.0, 0.0, F)


def test_grow_checks_leaf_count():
    with pytest.raises(ValueError):
        grow_tree(lambda t, level: FeatureHistogram.zeros(5, 1, 2), 2, 1.0, 0.0, F)


def test_canonical_leaf_order():
    tree = RegTree(
        TreeNode(
            feature=0,
            bin=1,
            left=TreeNode(feature=1, bin=0, left=TreeNode(weight_fp=10), right=TreeNode(weight_fp=20)),
            right=TreeNode(weight_fp=30),
        )
    )
    bins = np.array([[0, 0], [0, 1], [2, 0], [1, 5]])
    assert tree.assign_leaves(bins).tolist() == [0, 1, 2, 1]
    assert tree.predict_fp(bins).tolist() == [10, 20, 30, 20]
    assert tree.depth() == 2


def test_separable_feature_is_found(loss_spec, rng):
    bins = np.column_stack([np.repeat([0, 1], 50), rng.integers(0, 2, size=100)])
    labels = bins[:, 0].copy()
    params = BoostingParams(rounds=1, depth=1)
    ens = train_centralized(bins, labels, loss_spec, params, n_bins=2)
    root = ens.trees[0].root
    assert (root.feature, root.bin) == (0, 0)
    assert ens.predict_labels(bins).tolist() == labels.tolist()


# ------------------------
# Ensemble / metrics
# ------------------------
def test_empty_ensemble_predicts_majority():
    labels = np.array([1, 1, 0, 1])
    ens = Ensemble(0.3, F, majority_label(labels))
    bins = np.zeros((4, 2), dtype=np.int64)
    assert ens.predict(bins).tolist() == [0.0] * 4
    assert ens.predict_labels(bins).tolist() == [1, 1, 1, 1]
    acc, _ = metrics(ens.predict(bins), labels, ens.base_label)
    assert acc == pytest.approx(0.75)


def test_zero_margin_uses_base_label():
    assert labels_from_margins(np.array([-3, 0, 4]), base_label=0).tolist() == [0, 0, 1]
    assert labels_from_margins(np.array([-3, 0, 4]), base_label=1).tolist() == [0, 1, 1]


def test_metrics_logloss_at_zero_margin():
    _, logloss = metrics(np.zeros(2), np.array([0, 1]))
    assert logloss == pytest.approx(np.log(2))
    assert metrics(np.zeros(0), np.zeros(0)) == (0.0, 0.0)


def test_signed_labels():
    assert to_signed_labels(np.array([0, 1, 1])).tolist() == [-1, 1, 1]


def test_increment_is_rounded_learning_rate_times_weight():
    tree = RegTree(TreeNode(weight_fp=7))
    ens = Ensemble(0.5, F, trees=[tree])
    # round(3.5) == 4 (half to even)
    assert ens.tree_increment_fp(tree, np.zeros((1, 1))).tolist() == [4]


# ------------------------
# Centralized training
# ------------------------
@pytest.fixture(scope="module")
def trained(loss_spec):
    ds = generate_synthetic(2500, 10, noise=0.0, seed=7)
    edges = compute_bin_edges(ds.features, n_bins=32)
    bins = edges.assign(ds.features)
    rounds = []
    ens = train_centralized(
        bins, ds.labels, loss_spec, BoostingParams(rounds=20, depth=3), edges.n_bins,
        on_round=lambda t, e: rounds.append(t),
    )
    return ds, edges, bins, ens, rounds


def test_noiseless_training_accuracy(trained):
    ds, _, bins, ens, rounds = trained
    assert rounds == list(range(1, 21))
    assert all(t.depth() <= 3 for t in ens.trees)
    acc, _ = metrics(ens.predict(bins), ds.labels, ens.base_label)
    assert acc >= 0.85


def _held_out(noise, rows=20_000, seed=7):
    ds = generate_synthetic(rows, 10, noise=noise, seed=seed)
    train, test = train_test_split(ds, 0.2, seed=seed + 5)
    edges = compute_bin_edges(calibration_sample(train.features, seed + 2), 32)
    return train, test, edges


def test_training_accuracy_non_decreasing_over_first_rounds(loss_spec):
    train, _, edges = _held_out(0.05)
    bins = edges.assign(train.features)
    accs = []
    train_centralized(
        bins, train.labels, loss_spec, BoostingParams(rounds=5), edges.n_bins,
        on_round=lambda t, e: accs.append(metrics(e.predict(bins), train.labels, e.base_label)[0]),
    )
    assert len(accs) == 5
    assert accs == sorted(accs)


def test_random_labels_stay_at_chance(loss_spec):
    train, test, edges = _held_out(0.5)
    ens = train_centralized(edges.assign(train.features), train.labels, loss_spec, BoostingParams(), edges.n_bins)
    acc, _ = metrics(ens.predict(edges.assign(test.features)), test.labels, ens.base_label)
    assert acc == pytest.approx(0.5, abs=0.03)


def test_training_is_deterministic(trained, loss_spec):
    ds, edges, bins, ens, _ = trained
    again = train_centralized(bins, ds.labels, loss_spec, BoostingParams(rounds=20, depth=3), edges.n_bins)
    assert ensemble_to_json(again, edges) == ensemble_to_json(ens, edges)


# ------------------------
# Model JSON
# ------------------------
def test_model_json_round_trip(trained):
    _, edges, bins, ens, _ = trained
    text = ensemble_to_json(ens, edges)
    loaded, loaded_edges = ensemble_from_json(text)
    assert np.array_equal(loaded.predict_margin_fp(bins), ens.predict_margin_fp(bins))
    assert loaded_edges.to_lists() == edges.to_lists()
    assert ensemble_to_json(loaded, loaded_edges) == text


def test_model_json_layout(trained):
    _, edges, _, ens, _ = trained
    d = json.loads(ensemble_to_json(ens, edges))
    assert set(d) == {"learning_rate", "fraction_bits", "base_label", "bin_edges", "trees"}
    assert len(d["trees"]) == 20

    def weights(node):
        if "weight" in node:
            return [node["weight"]]
        return weights(node["left"]) + weights(node["right"])

    assert all(isinstance(w, str) for t in d["trees"] for w in weights(t))


def test_model_json_rejects_bad_threshold(trained):
    _, edges, _, ens, _ = trained
    d = ensemble_to_dict(ens, edges)
    d["trees"] = [{"feature": 0, "bin": 999, "left": {"weight": "1"}, "right": {"weight": "2"}}]
    with pytest.raises(ValueError):
        ensemble_from_json(json.dumps(d))
