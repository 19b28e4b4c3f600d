from __future__ import annotations

import logging

import numpy as np

logger = logging.getLogger(__name__)


class PartitionError(ValueError):
    """Dataset cannot be split across the requested nodes."""


def _largest_remainder(p: np.ndarray, total: int) -> np.ndarray:
    raw = p * total
    counts = np.floor(raw).astype(np.int64)
    short = total - int(counts.sum())
    if short:
        order = np.argsort(-(raw - counts), kind="stable")
        counts[order[:short]] += 1
    return counts


def _fit_capacity(counts: np.ndarray, capacity: np.ndarray) -> np.ndarray:
    """Move demand from over-subscribed classes to classes with spare rows, keeping row sums."""
    counts = counts.copy()
    while True:
        demand = counts.sum(axis=0)
        over = np.flatnonzero(demand > capacity)
        if not len(over):
            return counts
        c = int(over[0])
        spare = np.flatnonzero(demand < capacity)
        target = int(spare[0])
        # node holding the most rows of class c gives one up
        k = int(np.argmax(counts[:, c]))
        counts[k, c] -= 1
        counts[k, target] += 1


def partition_noniid(labels: np.ndarray, n_nodes: int, alpha: float, seed: int) -> list[np.ndarray]:
    """
    Row indices for each node. Node label mixes are drawn from
    Dirichlet(alpha * C * prior) (prior = global label frequencies, C classes),
    so alpha -> inf reproduces the global mix and small alpha gives skew.
    Every node gets exactly floor(N / n_nodes) rows; the rest is dropped.
    """
    if n_nodes < 1:
        raise PartitionError("n_nodes must be >= 1")
    if alpha <= 0:
        raise PartitionError("dirichlet alpha must be > 0")
    labels = np.asarray(labels)
    n = len(labels)
    size = n // n_nodes
    if size == 0:
        raise PartitionError(f"{n} rows cannot feed {n_nodes} nodes")

    rng = np.random.default_rng(seed)
    classes, capacity = np.unique(labels, return_counts=True)
    prior = capacity / n
    concentration = np.maximum(alpha * len(classes) * prior, 1e-12)
    mixes = rng.dirichlet(concentration, size=n_nodes)
    counts = np.stack([_largest_remainder(p, size) for p in mixes])
    counts = _fit_capacity(counts, capacity)

    pools = [rng.permutation(np.flatnonzero(labels == c)) for c in classes]
    cursors = [0] * len(classes)
    shards = []
    for k in range(n_nodes):
        parts = []
        for ci in range(len(classes)):
            take = int(counts[k, ci])
            parts.append(pools[ci][cursors[ci] : cursors[ci] + take])
            cursors[ci] += take
        shards.append(np.sort(np.concatenate(parts)))
    logger.info("partitioned %d rows into %d shards of %d (alpha=%g)", n, n_nodes, size, alpha)
    return shards
