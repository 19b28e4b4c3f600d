from dataclasses import dataclass
from functools import lru_cache

from app.boosting.loss import LossSpec, build_loss_spec
from app.config import settings
from app.crypto.bilinear import PairingGroup, TransparentGroup
from app.crypto.domain import EvaluationDomain
from app.crypto.r1cs import (
    CircuitLayout, ConstraintSystem, GradientCircuitParams, build_gradient_circuit, circuit_layout
)
from app.crypto.snark import CommonReferenceString, Qap, r1cs_to_qap, setup

# ----------------------------------------------------------------------
# Backends Factory (singleton via lru_cache)
# ----------------------------------------------------------------------


@lru_cache
def get_group() -> PairingGroup:
    """Return the singleton pairing backend selected in settings."""
    if settings.pairing_backend.lower() == "transparent":
        return TransparentGroup()
    raise ValueError(f"unknown pairing backend {settings.pairing_backend!r}")


@lru_cache
def get_loss_spec(
    degree: int = 6,
    max_degree: int = 16,
    margin_clamp: float = 6.0,
    fraction_bits: int = 16,
    gradient_bound: float = 32.0,
) -> LossSpec:
    """Fitted surrogate, shared by every node and the circuit."""
    return build_loss_spec(degree, max_degree, margin_clamp, fraction_bits, gradient_bound)


@lru_cache(maxsize=8)
def get_domain(size: int) -> EvaluationDomain:
    """Evaluation domain 1..size; the subproduct tree is the expensive part."""
    return EvaluationDomain(size)


@dataclass(frozen=True, eq=False)
class GradientCircuit:
    params: GradientCircuitParams
    cs: ConstraintSystem
    layout: CircuitLayout
    qap: Qap


@lru_cache(maxsize=8)
def get_gradient_circuit(params: GradientCircuitParams) -> GradientCircuit:
    """Circuit, slot layout and QAP for one parameter block (built once)."""
    cs = build_gradient_circuit(params)
    return GradientCircuit(params, cs, circuit_layout(params), r1cs_to_qap(cs, get_domain(cs.num_constraints)))


@lru_cache(maxsize=8)
def get_crs(params: GradientCircuitParams, seed: int) -> CommonReferenceString:
    """Trusted setup for a circuit; the trapdoor is dropped here."""
    crs, _ = setup(get_gradient_circuit(params).qap, rng_seed=seed, group=get_group())
    return crs
