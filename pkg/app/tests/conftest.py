import threading

import numpy as np
import pytest

from app.boosting.histogram import FeatureHistogram
from app.crypto.snark import setup
from app.dependencies import get_gradient_circuit, get_loss_spec
from app.fedsim.node import NodeUpdate
from app.schemas import ExperimentConfig


# ------------------------
# Surrogate / circuit
# ------------------------
@pytest.fixture(scope="session")
def loss_spec():
    """Default surrogate (f = 16, M = 6, B = 32), fitted once per session."""
    return get_loss_spec()


@pytest.fixture(scope="session")
def tiny_params(loss_spec):
    return loss_spec.circuit_params(2)


@pytest.fixture(scope="session")
def tiny_circuit(tiny_params):
    return get_gradient_circuit(tiny_params)


@pytest.fixture(scope="session")
def tiny_setup(tiny_circuit):
    """(crs, toxic waste) for the two-instance gradient circuit."""
    return setup(tiny_circuit.qap, rng_seed=11)


@pytest.fixture
def honest_shard():
    return [(1, 0.5), (-1, -1.25)]


# ------------------------
# Fake updates
# ------------------------
def make_hist(rng, n_leaves=1, n_features=3, n_bins=4, low=-50, high=50):
    shape = (n_leaves, n_features, n_bins)
    return FeatureHistogram(
        rng.integers(low, high, size=shape),
        rng.integers(0, high, size=shape),
        rng.integers(0, 5, size=shape),
    )


def make_update(node_id, hist, public=(0, 0, 0), round_no=1, level=0, proof=None):
    return NodeUpdate(node_id, round_no, level, hist, public, proof)


class RecordingCheck:
    """Thread-safe check that records which update ids it saw and on which thread."""

    def __init__(self, reject=()):
        self.reject = set(reject)
        self.seen = []
        self.threads = set()
        self._lock = threading.Lock()

    def __call__(self, update):
        with self._lock:
            self.seen.append(update.node_id)
            self.threads.add(threading.get_ident())
        return update.node_id not in self.reject


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# ------------------------
# Experiment configs
# ------------------------
@pytest.fixture
def small_config(tmp_path):
    """Fast experiment: 4 nodes x 30 rows, plaintext defenses only."""
    return ExperimentConfig(
        seed=3,
        n_nodes=4,
        byzantine_fraction=0.0,
        defense="none",
        rounds=3,
        depth=2,
        bins=8,
        threads=1,
        dataset={"n_rows": 150, "n_features": 4, "test_fraction": 0.2},
        output={"dir": str(tmp_path / "out"), "record_timing": False},
    )


@pytest.fixture
def zkp_config(tmp_path):
    """Smallest meaningful proof-checked run: 4 nodes x 3 rows."""
    return ExperimentConfig(
        seed=5,
        n_nodes=4,
        byzantine_fraction=0.0,
        defense="zkp",
        rounds=2,
        depth=2,
        bins=4,
        threads=1,
        dataset={"n_rows": 12, "n_features": 3, "test_fraction": 0.0},
        output={"dir": str(tmp_path / "zk"), "record_timing": False},
    )
