"""
Round loop of the federated simulation.

Per round:
  1. every node fixes its gradient statistics from its current margins
     (attackers poison them) and, under zkp, proves them: strict proofs for
     honest nodes, forge-mode proofs over a doctored witness for attackers;
  2. for each tree level every node ships histograms of all current leaves
     through the partitioned queue; the worker pool checks them and the
     aggregator merges the accepted ones (ascending node id) into the
     histogram `grow_tree` splits on;
  3. the finished tree is broadcast and every node updates its margins.

A node rejected at any level is rejected for the whole round.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from app.boosting.binning import BinEdges, calibration_sample, compute_bin_edges
from app.boosting.histogram import FeatureHistogram
from app.boosting.loss import LossSpec
from app.boosting.trainer import BoostingParams, to_signed_labels, train_centralized
from app.boosting.tree import Ensemble, RegTree, grow_tree, majority_label, metrics
from app.config import settings
from app.crypto.r1cs import public_inputs_of, synthesize_witness
from app.crypto.snark import CommonReferenceString, prove
from app.dependencies import GradientCircuit, get_crs, get_gradient_circuit, get_loss_spec
from app.fedsim.adversary import forge_witness, perturb_gradients
from app.fedsim.defenses import Defense, make_defense
from app.fedsim.metrics import median_influence_rate, summarize_defense
from app.fedsim.node import Honesty, NodeState, RoundStatistics, public_totals
from app.fedsim.partition import partition_noniid
from app.fedsim.queue import PartitionedQueue
from app.fedsim.workers import VerificationPool
from app.ingestion.dataset import Dataset, generate_synthetic, load_csv, train_test_split
from app.schemas import DatasetConfig, ExperimentConfig, RoundReport, RunSummary
from app.utils.misc import Stopwatch, resolve_threads

logger = logging.getLogger(__name__)

# offsets keep the per-purpose random streams independent of each other
_SEED_PARTITION = 1
_SEED_CALIBRATION = 2
_SEED_ADVERSARY = 3
_SEED_SETUP = 4
_SEED_SPLIT = 5


# ----------------------------------------------------------------------
# Data preparation
# ----------------------------------------------------------------------
def load_dataset(cfg: DatasetConfig, seed: int) -> Dataset:
    if cfg.source == "csv":
        return load_csv(cfg.path, cfg.limit_rows)  # type: ignore[arg-type]
    return generate_synthetic(cfg.n_rows, cfg.n_features, cfg.noise, seed)


def choose_byzantine(n_nodes: int, n_byzantine: int, seed: int) -> frozenset[int]:
    rng = np.random.default_rng(seed + _SEED_ADVERSARY)
    return frozenset(int(i) for i in rng.choice(n_nodes, size=n_byzantine, replace=False))


@dataclass
class ExperimentData:
    train: Dataset            # pooled shard rows, node order
    test: Dataset
    shards: list[np.ndarray]  # row indices into `train` per node
    edges: BinEdges
    train_bins: np.ndarray
    test_bins: np.ndarray
    byzantine: frozenset[int]

    @property
    def instances_per_node(self) -> int:
        return len(self.shards[0])


def prepare_data(config: ExperimentConfig) -> ExperimentData:
    full = load_dataset(config.dataset, config.seed)
    train_all, test = train_test_split(full, config.dataset.test_fraction, config.seed + _SEED_SPLIT)
    parts = partition_noniid(train_all.labels, config.n_nodes, config.dirichlet_alpha, config.seed + _SEED_PARTITION)
    pooled = train_all.take(np.concatenate(parts))
    size = len(parts[0])
    shards = [np.arange(k * size, (k + 1) * size) for k in range(config.n_nodes)]
    edges = compute_bin_edges(
        calibration_sample(pooled.features, config.seed + _SEED_CALIBRATION), config.bins
    )
    return ExperimentData(
        train=pooled,
        test=test,
        shards=shards,
        edges=edges,
        train_bins=edges.assign(pooled.features),
        test_bins=edges.assign(test.features) if test.n_rows else np.zeros((0, pooled.n_features), np.int64),
        byzantine=choose_byzantine(config.n_nodes, config.n_byzantine(), config.seed),
    )


def boosting_params(config: ExperimentConfig) -> BoostingParams:
    return BoostingParams(
        rounds=config.rounds,
        depth=config.depth,
        reg_lambda=config.reg_lambda,
        gamma=config.gamma,
        learning_rate=config.learning_rate,
    )


def loss_for(config: ExperimentConfig) -> LossSpec:
    c = config.circuit
    return get_loss_spec(c.degree, c.max_degree, c.margin_clamp, c.fraction_bits, c.gradient_bound)


# ----------------------------------------------------------------------
# Context / state
# ----------------------------------------------------------------------
@dataclass
class Proving:
    circuit: GradientCircuit
    crs: CommonReferenceString


@dataclass
class ExperimentContext:
    config: ExperimentConfig
    data: ExperimentData
    loss: LossSpec
    params: BoostingParams
    pool: VerificationPool
    queue: PartitionedQueue
    base_label: int
    proving: Proving | None = None

    def eval_split(self) -> tuple[np.ndarray, np.ndarray]:
        """Held-out rows, or the training rows when no test split was requested."""
        if self.data.test.n_rows:
            return self.data.test_bins, self.data.test.labels
        return self.data.train_bins, self.data.train.labels

    def accuracy(self, ensemble: Ensemble) -> float:
        bins, labels = self.eval_split()
        return metrics(ensemble.predict(bins), labels, ensemble.base_label)[0]


@dataclass
class SimulationState:
    defense: Defense
    nodes: list[NodeState]
    ensemble: Ensemble
    round: int = 0
    reports: list[RoundReport] = field(default_factory=list)


def build_context(config: ExperimentConfig, pool: VerificationPool | None = None) -> ExperimentContext:
    data = prepare_data(config)
    loss = loss_for(config)
    threads = resolve_threads(config.threads if config.threads is not None else settings.threads)
    ctx = ExperimentContext(
        config=config,
        data=data,
        loss=loss,
        params=boosting_params(config),
        pool=pool or VerificationPool(threads),
        queue=PartitionedQueue(config.queue_partitions or settings.queue_partitions),
        base_label=majority_label(data.train.labels),
    )
    if "zkp" in config.defenses():
        params = loss.circuit_params(data.instances_per_node, config.circuit.range_bits)
        ctx.proving = Proving(get_gradient_circuit(params), get_crs(params, config.seed + _SEED_SETUP))
    logger.info(
        "experiment: nodes=%d rows/node=%d byzantine=%s threads=%d",
        config.n_nodes, data.instances_per_node, sorted(data.byzantine), ctx.pool.threads,
    )
    return ctx


def make_nodes(ctx: ExperimentContext) -> list[NodeState]:
    cfg = ctx.config
    labels = to_signed_labels(ctx.data.train.labels)
    nodes = []
    for k, rows in enumerate(ctx.data.shards):
        honesty = Honesty(True, cfg.kappa, cfg.invert) if k in ctx.data.byzantine else Honesty()
        nodes.append(
            NodeState(
                id=k,
                bins=ctx.data.train_bins[rows],
                labels=labels[rows],
                margins_fp=np.zeros(len(rows), dtype=np.int64),
                honesty=honesty,
            )
        )
    return nodes


def new_state(ctx: ExperimentContext, defense_name: str) -> SimulationState:
    crs = ctx.proving.crs if ctx.proving is not None else None
    return SimulationState(
        defense=make_defense(defense_name, crs),
        nodes=make_nodes(ctx),
        ensemble=Ensemble(ctx.params.learning_rate, ctx.loss.fraction_bits, ctx.base_label),
    )


# ----------------------------------------------------------------------
# Node side
# ----------------------------------------------------------------------
def prepare_node(ctx: ExperimentContext, node: NodeState, round_no: int, with_proof: bool) -> RoundStatistics:
    """Gradient statistics (+ proof) a node commits to for one round."""
    g, h = node.honest_gradients(ctx.loss)
    byzantine = node.honesty.byzantine
    if byzantine:
        g, h = perturb_gradients(g, h, node.honesty.kappa, node.honesty.invert)
    public = public_totals(g, h)
    if not with_proof:
        return RoundStatistics(g, h, public)

    circuit = ctx.proving.circuit  # type: ignore[union-attr]
    w, _ = synthesize_witness(circuit.params, node.shard_pairs(ctx.loss.fraction_bits))
    mode = "strict"
    if byzantine:
        w = forge_witness(w, circuit.layout, g, h)
        mode = "forge"
    rng = np.random.default_rng([ctx.config.seed, round_no, node.id])
    proof = prove(ctx.proving.crs, circuit.qap, circuit.cs, w, mode, rng)  # type: ignore[union-attr]
    return RoundStatistics(g, h, public_inputs_of(w), proof, forged=byzantine)  # type: ignore[arg-type]


# ----------------------------------------------------------------------
# Rounds
# ----------------------------------------------------------------------
def run_round(state: SimulationState, ctx: ExperimentContext) -> RoundReport:
    cfg = ctx.config
    round_no = state.round + 1
    defense = state.defense
    with_proof = defense.name == "zkp"
    n_bins = ctx.data.edges.n_bins

    stats = ctx.pool.map(lambda n: prepare_node(ctx, n, round_no, with_proof), state.nodes)
    for node, st in zip(state.nodes, stats):
        node.stats = st

    rejected: set[int] = set()
    agg_ms = 0.0
    influence: list[float] = []

    def source(tree: RegTree, level: int) -> FeatureHistogram:
        nonlocal agg_ms
        ctx.queue.reset_counters()
        for node in state.nodes:
            ctx.queue.put(node.make_update(round_no, level, tree, n_bins))
        with Stopwatch() as sw:
            verdicts = ctx.pool.drain(ctx.queue, defense.check)
            updates = [v.update for v in verdicts]
            result = defense.decide(updates, [v.ok and v.node_id not in rejected for v in verdicts])
        agg_ms += sw.elapsed_ms
        if ctx.queue.dequeued != ctx.queue.enqueued:
            raise RuntimeError("queue lost updates")
        rejected.update(result.rejected)
        if defense.name == "median" and ctx.data.byzantine:
            influence.append(
                median_influence_rate(
                    [u.histograms for u in updates],
                    [u.histograms for u in updates if u.node_id not in ctx.data.byzantine],
                )
            )
        return result.aggregate

    tree = grow_tree(source, ctx.params.depth, ctx.params.reg_lambda, ctx.params.gamma, ctx.loss.fraction_bits)
    for node in state.nodes:
        node.apply_tree(state.ensemble.tree_increment_fp(tree, node.bins))
    state.ensemble.trees.append(tree)
    state.round = round_no

    accepted = [n.id for n in state.nodes if n.id not in rejected]
    report = RoundReport(
        round=round_no,
        defense=defense.name,  # type: ignore[arg-type]
        accepted=accepted,
        rejected=sorted(rejected),
        accuracy=ctx.accuracy(state.ensemble),
        agg_ms=agg_ms if cfg.output.record_timing else 0.0,
        byzantine_submitted=len(ctx.data.byzantine),
        byzantine_accepted=sum(1 for k in accepted if k in ctx.data.byzantine),
        influence_rate=float(np.mean(influence)) if influence else (0.0 if defense.name == "median" else None),
    )
    state.reports.append(report)
    logger.info(
        "[%s] round %d: accepted=%d rejected=%d acc=%.4f",
        defense.name, round_no, len(report.accepted), len(report.rejected), report.accuracy,
    )
    return report


def run_defense(ctx: ExperimentContext, defense_name: str) -> SimulationState:
    state = new_state(ctx, defense_name)
    for _ in range(ctx.config.rounds):
        run_round(state, ctx)
    return state


@dataclass
class ExperimentResult:
    reports: list[RoundReport]
    summary: RunSummary
    ensembles: dict[str, Ensemble]
    edges: BinEdges
    pristine: Ensemble


def pristine_baseline(ctx: ExperimentContext) -> Ensemble:
    """Centralized model on every training row (no attackers)."""
    return train_centralized(ctx.data.train_bins, ctx.data.train.labels, ctx.loss, ctx.params, ctx.data.edges.n_bins)


def run_experiment(config: ExperimentConfig, pool: VerificationPool | None = None) -> ExperimentResult:
    owns_pool = pool is None
    ctx = build_context(config, pool)
    try:
        pristine = pristine_baseline(ctx)
        reports: list[RoundReport] = []
        ensembles: dict[str, Ensemble] = {}
        for name in config.defenses():
            state = run_defense(ctx, name)
            reports += state.reports
            ensembles[name] = state.ensemble
    finally:
        if owns_pool:
            ctx.pool.close()

    summary = RunSummary(
        seed=config.seed,
        n_nodes=config.n_nodes,
        instances_per_node=ctx.data.instances_per_node,
        byzantine_nodes=sorted(ctx.data.byzantine),
        pristine_accuracy=ctx.accuracy(pristine),
        records=[summarize_defense(reports, name) for name in config.defenses()],
    )
    return ExperimentResult(reports, summary, ensembles, ctx.data.edges, pristine)
