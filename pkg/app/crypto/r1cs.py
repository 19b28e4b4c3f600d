"""
Rank-1 constraint systems and the gradient-validity circuit.

A constraint is a triple of sparse linear combinations (A, B, C) over the
variables w, satisfied when <A, w> * <B, w> == <C, w> in GF(p).
Variable 0 is the constant one; variables 1..num_public are public inputs.

Gradient circuit layout
-----------------------
Public inputs: [G_total, H_total, n_count] at indices 1, 2, 3.
Per instance i (all fixed point with f fraction bits, negatives as p - |x|):

    y_i * (y_i - 1) = 0                           label selector, 1 <-> y = +1
    m_i + M_fp in [0, 2*M_fp]                     clamped margin
    t_i = fixed_mul(m_i, K)                       K = round(2^f / M), t ~ m / M
    g_i = horner(c^g(y_i), t_i)                   label-selected coefficients
    h_i = horner(c^h(y_i), t_i)
    g_i + B_fp in [0, 2*B_fp)
    h_i in [0, B_fp)

Globals: sum g_i = G_total, sum h_i = H_total, n_count = n.

fixed_mul(a, b) enforces a*b = c*2^f + r with r decomposed into f bits
(f + 2 constraints). A range check v in [0, b) costs rc(b) constraints:

    n = bitlen(b - 1)
    rc(b) = n + 1          if b is a power of two (decompose v)
    rc(b) = 2 * (n + 1)    otherwise (decompose v and b - 1 - v)

Total constraints:

    per_instance = 1 + rc(2*M_fp + 1) + (f + 2) + 2*(d*(f + 2) + 1)
                   + rc(2*B_fp) + rc(B_fp)
    total        = n_instances * per_instance + 3
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence, Union

from app.crypto.finite_field import P, FieldElement, FieldLike, to_signed
from app.utils.fixed_point import encode, fixed_mul_parts, normalizing_scale

logger = logging.getLogger(__name__)

LinearCombination = dict[int, int]
Operand = Union[int, LinearCombination]  # a variable index or a linear combination

PUBLIC_G_TOTAL = 1
PUBLIC_H_TOTAL = 2
PUBLIC_N_COUNT = 3
NUM_PUBLIC = 3


class LengthMismatch(ValueError):
    """Witness or public-input vector has the wrong length."""


class WitnessSynthesisError(ValueError):
    """A witness value violates a gadget precondition (e.g. out of range)."""


class EncodingOverflow(WitnessSynthesisError):
    """A real input cannot be encoded in the circuit's fixed-point format."""


class CircuitParamsError(ValueError):
    """Gradient circuit parameters violate their invariants."""


# ----------------------------------------------------------------------
# Constraint system
# ----------------------------------------------------------------------
class Constraint(NamedTuple):
    a: LinearCombination
    b: LinearCombination
    c: LinearCombination


@dataclass(frozen=True)
class ConstraintSystem:
    num_vars: int
    num_public: int
    rows: tuple[Constraint, ...]

    def __post_init__(self) -> None:
        if not 0 <= self.num_public < self.num_vars:
            raise ValueError("num_public must be < num_vars")
        for j, row in enumerate(self.rows):
            for lc in row:
                for idx in lc:
                    if not 0 <= idx < self.num_vars:
                        raise ValueError(f"row {j} references variable {idx} >= num_vars={self.num_vars}")

    @property
    def num_constraints(self) -> int:
        return len(self.rows)


@dataclass(frozen=True)
class Witness:
    values: tuple[int, ...]

    def __post_init__(self) -> None:
        vals = tuple(v.value if isinstance(v, FieldElement) else int(v) % P for v in self.values)
        if not vals or vals[0] != 1:
            raise ValueError("witness slot 0 must be the constant one")
        object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return len(self.values)

    def field_values(self) -> list[FieldElement]:
        return [FieldElement(v) for v in self.values]

    def replace(self, updates: dict[int, FieldLike]) -> "Witness":
        """Copy with some slots overwritten (used to build adversarial witnesses)."""
        vals = list(self.values)
        for idx, v in updates.items():
            vals[idx] = v.value if isinstance(v, FieldElement) else int(v) % P
        return Witness(tuple(vals))


def lc_dot(lc: LinearCombination, values: Sequence[int]) -> int:
    return sum(coef * values[idx] for idx, coef in lc.items()) % P


def evaluate_rows(cs: ConstraintSystem, w: Witness) -> tuple[list[int], list[int], list[int]]:
    """Per-row <A, w>, <B, w>, <C, w>."""
    if len(w.values) != cs.num_vars:
        raise LengthMismatch(f"witness has {len(w.values)} slots, system has {cs.num_vars}")
    vals = w.values
    a = [lc_dot(r.a, vals) for r in cs.rows]
    b = [lc_dot(r.b, vals) for r in cs.rows]
    c = [lc_dot(r.c, vals) for r in cs.rows]
    return a, b, c


def is_satisfied(cs: ConstraintSystem, w: Witness) -> bool:
    a, b, c = evaluate_rows(cs, w)
    return all(x * y % P == z for x, y, z in zip(a, b, c))


# ----------------------------------------------------------------------
# Builder
# ----------------------------------------------------------------------
class CircuitBuilder:
    """
    Allocates variables and records constraints.

    In shape mode (`with_values=False`) every value is None and only the
    constraint rows are produced; in witness mode values are tracked and,
    with `record_rows=False`, rows are only counted. Running the same
    synthesis code in both modes keeps circuit and witness in lock-step.
    """

    def __init__(self, num_public: int, *, with_values: bool, record_rows: bool = True) -> None:
        self.with_values = with_values
        self.record_rows = record_rows
        self.num_public = num_public
        self.values: list[int | None] = [1] + [0 if with_values else None] * num_public
        self.rows: list[Constraint] = []
        self.row_count = 0

    @property
    def num_vars(self) -> int:
        return len(self.values)

    def alloc(self, value: int | None = None) -> int:
        if self.with_values:
            if value is None:
                raise WitnessSynthesisError("witness mode needs a value for every variable")
            self.values.append(value % P)
        else:
            self.values.append(None)
        return len(self.values) - 1

    def set_public(self, idx: int, value: int) -> None:
        if not 1 <= idx <= self.num_public:
            raise IndexError(f"{idx} is not a public slot")
        if self.with_values:
            self.values[idx] = value % P

    def enforce(self, a: Operand, b: Operand, c: Operand) -> None:
        self.row_count += 1
        if self.record_rows:
            self.rows.append(Constraint(as_lc(a), as_lc(b), as_lc(c)))

    def value(self, x: Operand) -> int:
        """Canonical field value of a variable or linear combination (witness mode)."""
        if isinstance(x, int):
            return self.values[x]  # type: ignore[return-value]
        return lc_dot(x, self.values)  # type: ignore[arg-type]

    def signed(self, x: Operand) -> int:
        return to_signed(self.value(x))

    def build(self) -> ConstraintSystem:
        return ConstraintSystem(self.num_vars, self.num_public, tuple(self.rows))

    def witness(self) -> Witness:
        if not self.with_values:
            raise RuntimeError("shape-only builder has no witness")
        return Witness(tuple(self.values))  # type: ignore[arg-type]


def as_lc(x: Operand) -> LinearCombination:
    return {x: 1} if isinstance(x, int) else x


def lc_const(c: int) -> LinearCombination:
    c %= P
    return {0: c} if c else {}


def lc_add(*terms: Operand) -> LinearCombination:
    out: LinearCombination = {}
    for t in terms:
        for idx, coef in as_lc(t).items():
            v = (out.get(idx, 0) + coef) % P
            if v:
                out[idx] = v
            else:
                out.pop(idx, None)
    return out


ONE: LinearCombination = {0: 1}


# ----------------------------------------------------------------------
# Gadgets
# ----------------------------------------------------------------------
def gadget_bit_decompose(builder: CircuitBuilder, var: Operand, n_bits: int) -> list[int]:
    """Booleanity per bit plus one recomposition row; n_bits + 1 constraints."""
    bits_val: list[int | None] = [None] * n_bits
    if builder.with_values:
        v = builder.value(var)
        if v >> n_bits:
            raise WitnessSynthesisError(f"value {to_signed(v)} does not fit in {n_bits} bits")
        bits_val = [(v >> j) & 1 for j in range(n_bits)]
    bits = [builder.alloc(b) for b in bits_val]
    for b in bits:
        builder.enforce(b, {b: 1, 0: P - 1}, {})
    builder.enforce({b: (1 << j) % P for j, b in enumerate(bits)}, ONE, var)
    return bits


def range_check_cost(bound: int) -> int:
    n = (bound - 1).bit_length()
    return n + 1 if bound & (bound - 1) == 0 else 2 * (n + 1)


def gadget_range_check(builder: CircuitBuilder, var: Operand, bound: int) -> None:
    """Enforce 0 <= var < bound (bound >= 1)."""
    if bound < 1:
        raise CircuitParamsError("range bound must be positive")
    n = (bound - 1).bit_length()
    lc = as_lc(var)
    if builder.with_values and builder.value(lc) >= bound:
        raise WitnessSynthesisError(f"value {builder.signed(lc)} outside [0, {bound})")
    gadget_bit_decompose(builder, lc, n)
    if bound & (bound - 1):
        # bound - 1 - var must also fit in n bits
        gadget_bit_decompose(builder, lc_add(lc_const(bound - 1), {k: -c % P for k, c in lc.items()}), n)


def gadget_fixed_mul(builder: CircuitBuilder, a: Operand, b: Operand, fraction_bits: int) -> int:
    """c = floor(a*b / 2^f) via a*b = c*2^f + r, r in [0, 2^f)."""
    c_val = r_val = None
    if builder.with_values:
        c_val, r_val = fixed_mul_parts(builder.signed(a), builder.signed(b), fraction_bits)
    c = builder.alloc(c_val)
    r = builder.alloc(r_val)
    builder.enforce(a, b, {c: (1 << fraction_bits) % P, r: 1})
    gadget_bit_decompose(builder, r, fraction_bits)
    return c


def gadget_poly_eval(
    builder: CircuitBuilder, x: Operand, coeffs: Sequence[int | LinearCombination], fraction_bits: int
) -> int:
    """
    Fixed-point Horner evaluation, coefficients lowest degree first. Plain ints
    are constants; linear combinations allow label-selected coefficients.
    Returns the variable bound to the result.
    """
    if not coeffs:
        raise CircuitParamsError("polynomial needs at least one coefficient")
    terms = [lc_const(c) if isinstance(c, int) else dict(c) for c in coeffs]
    acc = terms[-1]
    for term in reversed(terms[:-1]):
        prod = gadget_fixed_mul(builder, acc, x, fraction_bits)
        acc = lc_add(prod, term)
    y = builder.alloc(builder.value(acc) if builder.with_values else None)
    builder.enforce(acc, ONE, y)
    return y


# ----------------------------------------------------------------------
# Gradient circuit
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class GradientCircuitParams:
    n_instances: int
    fraction_bits: int = 16
    margin_clamp: float = 6.0
    gradient_bound: float = 32.0
    range_bits: int = 24
    degree: int = 6
    # fixed-point surrogate coefficients in t = m / M, lowest degree first
    g_pos: tuple[int, ...] = ()
    g_neg: tuple[int, ...] = ()
    h_pos: tuple[int, ...] = ()
    h_neg: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if self.n_instances < 1:
            raise CircuitParamsError("n_instances must be >= 1")
        if not 1 <= self.fraction_bits <= 30:
            raise CircuitParamsError("fraction_bits must be in [1, 30]")
        if self.margin_clamp <= 0 or self.gradient_bound <= 0:
            raise CircuitParamsError("margin_clamp and gradient_bound must be positive")
        if 2 * self.bound_fp >= 1 << self.range_bits:
            raise CircuitParamsError("2*B*2^f must be < 2^range_bits")
        if self.n_instances * (1 << self.range_bits) >= P // 2:
            raise CircuitParamsError("n_instances * 2^range_bits would wrap the field")
        for name in ("g_pos", "g_neg", "h_pos", "h_neg"):
            if len(getattr(self, name)) != self.degree + 1:
                raise CircuitParamsError(f"{name} needs degree + 1 = {self.degree + 1} coefficients")

    @property
    def margin_fp(self) -> int:
        return encode(self.margin_clamp, self.fraction_bits)

    @property
    def bound_fp(self) -> int:
        return encode(self.gradient_bound, self.fraction_bits)

    @property
    def margin_scale(self) -> int:
        """K = round(2^f / M); t = fixed_mul(m, K) is the normalized margin."""
        return normalizing_scale(self.margin_clamp, self.fraction_bits)

    def constraint_count(self) -> int:
        f, d = self.fraction_bits, self.degree
        per_instance = (
            1
            + range_check_cost(2 * self.margin_fp + 1)
            + (f + 2)
            + 2 * (d * (f + 2) + 1)
            + range_check_cost(2 * self.bound_fp)
            + range_check_cost(self.bound_fp)
        )
        return self.n_instances * per_instance + 3


@dataclass(frozen=True)
class CircuitLayout:
    """Variable indices of the per-instance slots and public inputs."""
    y_vars: tuple[int, ...]
    m_vars: tuple[int, ...]
    g_vars: tuple[int, ...]
    h_vars: tuple[int, ...]
    g_total: int = PUBLIC_G_TOTAL
    h_total: int = PUBLIC_H_TOTAL
    n_count: int = PUBLIC_N_COUNT


@dataclass
class _Slots:
    y: list[int] = field(default_factory=list)
    m: list[int] = field(default_factory=list)
    g: list[int] = field(default_factory=list)
    h: list[int] = field(default_factory=list)


def _selected(y_var: int, pos: Sequence[int], neg: Sequence[int]) -> list[LinearCombination]:
    """c_k = c_neg + y * (c_pos - c_neg)."""
    return [lc_add(lc_const(cn), {y_var: (cp - cn) % P} if cp != cn else {}) for cp, cn in zip(pos, neg)]


def _synthesize(
    params: GradientCircuitParams,
    builder: CircuitBuilder,
    shard: Sequence[tuple[int, int]] | None,
) -> _Slots:
    """Shared synthesis; `shard` holds (selector, clamped margin_fp) pairs in witness mode."""
    f = params.fraction_bits
    m_fp, b_fp = params.margin_fp, params.bound_fp
    slots = _Slots()
    for i in range(params.n_instances):
        sel, margin = shard[i] if shard is not None else (None, None)
        y = builder.alloc(sel)
        builder.enforce(y, {y: 1, 0: P - 1}, {})
        m = builder.alloc(margin)
        gadget_range_check(builder, {m: 1, 0: m_fp}, 2 * m_fp + 1)
        t = gadget_fixed_mul(builder, m, lc_const(params.margin_scale), f)
        g = gadget_poly_eval(builder, t, _selected(y, params.g_pos, params.g_neg), f)
        h = gadget_poly_eval(builder, t, _selected(y, params.h_pos, params.h_neg), f)
        gadget_range_check(builder, {g: 1, 0: b_fp}, 2 * b_fp)
        gadget_range_check(builder, h, b_fp)
        slots.y.append(y)
        slots.m.append(m)
        slots.g.append(g)
        slots.h.append(h)

    if builder.with_values:
        builder.set_public(PUBLIC_G_TOTAL, sum(builder.signed(g) for g in slots.g))
        builder.set_public(PUBLIC_H_TOTAL, sum(builder.signed(h) for h in slots.h))
        builder.set_public(PUBLIC_N_COUNT, params.n_instances)
    builder.enforce({g: 1 for g in slots.g}, ONE, PUBLIC_G_TOTAL)
    builder.enforce({h: 1 for h in slots.h}, ONE, PUBLIC_H_TOTAL)
    builder.enforce(PUBLIC_N_COUNT, ONE, lc_const(params.n_instances))
    return slots


def build_gradient_circuit(params: GradientCircuitParams) -> ConstraintSystem:
    builder = CircuitBuilder(NUM_PUBLIC, with_values=False)
    _synthesize(params, builder, None)
    cs = builder.build()
    logger.info(
        "gradient circuit: n=%d constraints=%d vars=%d", params.n_instances, cs.num_constraints, cs.num_vars
    )
    return cs


def circuit_layout(params: GradientCircuitParams) -> CircuitLayout:
    builder = CircuitBuilder(NUM_PUBLIC, with_values=False, record_rows=False)
    slots = _synthesize(params, builder, None)
    return CircuitLayout(tuple(slots.y), tuple(slots.m), tuple(slots.g), tuple(slots.h))


def encode_margin(margin: float, params: GradientCircuitParams) -> int:
    """Real margin -> clamped fixed-point integer in [-M_fp, M_fp]."""
    if not math.isfinite(margin):
        raise EncodingOverflow(f"margin {margin!r} is not finite")
    m = encode(margin, params.fraction_bits)
    return max(-params.margin_fp, min(params.margin_fp, m))


def synthesize_witness(
    params: GradientCircuitParams, shard: Sequence[tuple[int, float]]
) -> tuple[Witness, tuple[int, ...]]:
    """
    Fill every slot of the gradient circuit for a shard of (label, margin)
    pairs with labels in {-1, +1}. Returns the witness and the canonical
    public inputs [G_total, H_total, n_count].
    """
    if len(shard) != params.n_instances:
        raise LengthMismatch(f"shard has {len(shard)} rows, circuit expects {params.n_instances}")
    encoded = []
    clamped = 0
    for y, margin in shard:
        if y not in (-1, 1):
            raise WitnessSynthesisError(f"label must be -1 or +1, got {y!r}")
        m = encode_margin(float(margin), params)
        clamped += abs(m) == params.margin_fp
        encoded.append((1 if y == 1 else 0, m))
    if clamped:
        logger.debug("synthesize_witness: %d margins at the clamp", clamped)
    builder = CircuitBuilder(NUM_PUBLIC, with_values=True, record_rows=False)
    _synthesize(params, builder, encoded)
    w = builder.witness()
    return w, w.values[1 : NUM_PUBLIC + 1]


def public_inputs_of(w: Witness, num_public: int = NUM_PUBLIC) -> tuple[int, ...]:
    return w.values[1 : num_public + 1]
