"""
R1CS -> QAP reduction, trusted setup, prover and pairing verifier.

The scheme is Pinocchio-shaped with a single verification equation

    e(piA, piB) == e(piC, G) * e(V_pub, H),     G = H = g2

and no knowledge-of-exponent terms. It is sound against provers that run
`prove` as published (including on an invalid witness, `mode="forge"`), not
against provers that craft arbitrary group elements.

Per-variable QAP polynomials are kept in Lagrange form over the domain
1..m (the constraint columns); the prover interpolates only the three
witness-combined polynomials.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from app.crypto.bilinear import GroupElement, PairingGroup, Side, SideMismatch, TransparentGroup
from app.crypto.domain import EvaluationDomain
from app.crypto.finite_field import P, FieldElement, FieldLike, Polynomial, lagrange_interpolate
from app.crypto.r1cs import (
    ConstraintSystem,
    GradientCircuitParams,
    LengthMismatch,
    Witness,
    build_gradient_circuit,
    evaluate_rows,
    synthesize_witness,
)
from app.utils.misc import Stopwatch, median_ms

logger = logging.getLogger(__name__)

ProveMode = Literal["strict", "forge"]


class EmptySystem(ValueError):
    """QAP reduction of a system without constraints."""


class UnsatisfiedWitness(ValueError):
    """Strict proving of a witness whose QAP quotient leaves a remainder."""


# ----------------------------------------------------------------------
# QAP
# ----------------------------------------------------------------------
Column = dict[int, int]  # domain point j -> coefficient


@dataclass(frozen=True)
class Qap:
    num_vars: int
    num_public: int
    domain: EvaluationDomain
    a_cols: tuple[Column, ...]
    b_cols: tuple[Column, ...]
    c_cols: tuple[Column, ...]

    @property
    def num_constraints(self) -> int:
        return self.domain.size

    @property
    def target(self) -> Polynomial:
        return self.domain.vanishing

    def _poly(self, col: Column) -> Polynomial:
        return lagrange_interpolate([(j, col.get(j, 0)) for j in self.domain.points])

    def a_poly(self, i: int) -> Polynomial:
        return self._poly(self.a_cols[i])

    def b_poly(self, i: int) -> Polynomial:
        return self._poly(self.b_cols[i])

    def c_poly(self, i: int) -> Polynomial:
        return self._poly(self.c_cols[i])

    def evaluations_at(self, s: int) -> tuple[list[int], list[int], list[int]]:
        """[A_i(s)], [B_i(s)], [C_i(s)] for every variable i."""
        basis = self.domain.lagrange_basis_at(s)

        def at(cols: tuple[Column, ...]) -> list[int]:
            return [sum(coef * basis[j - 1] for j, coef in col.items()) % P for col in cols]

        return at(self.a_cols), at(self.b_cols), at(self.c_cols)


def r1cs_to_qap(cs: ConstraintSystem, domain: EvaluationDomain | None = None) -> Qap:
    if not cs.rows:
        raise EmptySystem("cannot reduce a system with no constraints")
    if domain is not None and domain.size != cs.num_constraints:
        raise ValueError(f"domain has {domain.size} points, system has {cs.num_constraints} rows")
    a_cols: list[Column] = [{} for _ in range(cs.num_vars)]
    b_cols: list[Column] = [{} for _ in range(cs.num_vars)]
    c_cols: list[Column] = [{} for _ in range(cs.num_vars)]
    for j, row in enumerate(cs.rows, start=1):
        for cols, lc in ((a_cols, row.a), (b_cols, row.b), (c_cols, row.c)):
            for idx, coef in lc.items():
                cols[idx][j] = coef
    return Qap(
        num_vars=cs.num_vars,
        num_public=cs.num_public,
        domain=domain or EvaluationDomain(cs.num_constraints),
        a_cols=tuple(a_cols),
        b_cols=tuple(b_cols),
        c_cols=tuple(c_cols),
    )


# ----------------------------------------------------------------------
# Setup
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class ToxicWaste:
    """Setup trapdoor. Only setup and white-box tests ever hold one."""
    s: FieldElement

    def __repr__(self) -> str:
        return "ToxicWaste(<redacted>)"


@dataclass(frozen=True)
class CommonReferenceString:
    group: PairingGroup
    num_public: int
    g1_powers: tuple[GroupElement, ...]  # g1^{s^j}, j = 0..2m
    g2_powers: tuple[GroupElement, ...]  # g2^{s^j}, j = 0..2m
    a_g1: tuple[GroupElement, ...]       # g1^{A_i(s)}
    b_g2: tuple[GroupElement, ...]       # g2^{B_i(s)}
    c_g1: tuple[GroupElement, ...]       # g1^{C_i(s)}
    z_g1: GroupElement
    z_g2: GroupElement

    @property
    def g(self) -> GroupElement:
        return self.group.generator(Side.G2)

    @property
    def h(self) -> GroupElement:
        return self.group.generator(Side.G2)


def setup(
    qap: Qap, rng_seed: int | None = None, group: PairingGroup | None = None
) -> tuple[CommonReferenceString, ToxicWaste]:
    group = group or TransparentGroup()
    rng = np.random.default_rng(rng_seed)
    while True:
        s = group.random_scalar(rng)
        z_s = qap.target.evaluate(s)
        if s and z_s:
            break

    g1, g2 = group.generator(Side.G1), group.generator(Side.G2)
    n_powers = 2 * qap.num_constraints + 1
    powers = [1] * n_powers
    for j in range(1, n_powers):
        powers[j] = powers[j - 1] * s % P
    a_s, b_s, c_s = qap.evaluations_at(s)

    crs = CommonReferenceString(
        group=group,
        num_public=qap.num_public,
        g1_powers=tuple(g1 ** x for x in powers),
        g2_powers=tuple(g2 ** x for x in powers),
        a_g1=tuple(g1 ** x for x in a_s),
        b_g2=tuple(g2 ** x for x in b_s),
        c_g1=tuple(g1 ** x for x in c_s),
        z_g1=g1 ** z_s,
        z_g2=g2 ** z_s,
    )
    logger.info(
        "setup: backend=%s constraints=%d vars=%d powers=%d",
        group.name, qap.num_constraints, qap.num_vars, n_powers,
    )
    return crs, ToxicWaste(FieldElement(s))


# ----------------------------------------------------------------------
# Prove / verify
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class Proof:
    piA: GroupElement
    piB: GroupElement
    piC: GroupElement

    @property
    def well_formed(self) -> bool:
        return (self.piA.side, self.piB.side, self.piC.side) == (Side.G1, Side.G2, Side.G1)


def prove(
    crs: CommonReferenceString,
    qap: Qap,
    cs: ConstraintSystem,
    w: Witness,
    mode: ProveMode = "strict",
    rng: np.random.Generator | None = None,
) -> Proof:
    if mode not in ("strict", "forge"):
        raise ValueError(f"unknown prove mode {mode!r}")
    if len(w.values) != qap.num_vars:
        raise LengthMismatch(f"witness has {len(w.values)} slots, QAP has {qap.num_vars}")
    group = crs.group
    rng = rng if rng is not None else np.random.default_rng()
    domain = qap.domain

    a_rows, b_rows, c_rows = evaluate_rows(cs, w)
    a_w = domain.interpolate(a_rows)
    b_w = domain.interpolate(b_rows)
    c_w = domain.interpolate(c_rows)
    quotient, remainder = domain.divide_by_vanishing(a_w * b_w - c_w)
    if not remainder.is_zero():
        if mode == "strict":
            raise UnsatisfiedWitness("A_w*B_w - C_w is not divisible by Z")
        logger.debug("prove(forge): discarding remainder of degree %d", remainder.degree)

    d1 = group.random_scalar(rng)
    d2 = group.random_scalar(rng)
    z = qap.target
    vals = w.values

    pi_a = group.multi_exp(crs.a_g1, vals) * (crs.z_g1 ** d1)
    pi_b = group.multi_exp(crs.b_g2, vals) * (crs.z_g2 ** d2)

    h_blind = quotient + a_w * d2 + b_w * d1 + z * (d1 * d2 % P)
    t = h_blind * z
    first_private = qap.num_public + 1
    pi_c = group.multi_exp(crs.g1_powers[: len(t.coeffs)], t.coeffs) * group.multi_exp(
        crs.c_g1[first_private:], vals[first_private:]
    )
    return Proof(pi_a, pi_b, pi_c)


def compute_vpub(crs: CommonReferenceString, public_inputs: Sequence[FieldLike]) -> GroupElement:
    if len(public_inputs) != crs.num_public:
        raise LengthMismatch(f"expected {crs.num_public} public inputs, got {len(public_inputs)}")
    scalars = [1] + [x.value if isinstance(x, FieldElement) else int(x) % P for x in public_inputs]
    return crs.group.multi_exp(crs.c_g1[: crs.num_public + 1], scalars)


def verify(crs: CommonReferenceString, public_inputs: Sequence[FieldLike], proof: Proof) -> bool:
    try:
        if not proof.well_formed:
            return False
        group = crs.group
        v_pub = compute_vpub(crs, public_inputs)
        lhs = group.pair(proof.piA, proof.piB)
        rhs = group.pair(proof.piC, crs.g) * group.pair(v_pub, crs.h)
        return lhs == rhs
    except (SideMismatch, LengthMismatch) as e:
        logger.debug("verify: rejecting malformed input (%s)", e)
        return False


# ----------------------------------------------------------------------
# Benchmark
# ----------------------------------------------------------------------
def bench_prove_verify(
    params: GradientCircuitParams, iterations: int = 20, seed: int = 0
) -> tuple[float, float]:
    """Median wall-clock (prove_ms, verify_ms) for honest shards of the gradient circuit."""
    rng = np.random.default_rng(seed)
    cs = build_gradient_circuit(params)
    qap = r1cs_to_qap(cs)
    crs, _ = setup(qap, rng_seed=seed)

    prove_samples, verify_samples = [], []
    for _ in range(max(1, iterations)):
        labels = rng.choice([-1, 1], size=params.n_instances)
        margins = rng.uniform(-params.margin_clamp, params.margin_clamp, size=params.n_instances)
        w, public = synthesize_witness(params, list(zip(labels.tolist(), margins.tolist())))
        with Stopwatch() as sw:
            proof = prove(crs, qap, cs, w, "strict", rng)
        prove_samples.append(sw.elapsed_ms)
        with Stopwatch() as sw:
            ok = verify(crs, public, proof)
        verify_samples.append(sw.elapsed_ms)
        if not ok:
            raise RuntimeError("honest proof failed verification during benchmark")
    return median_ms(prove_samples), median_ms(verify_samples)
