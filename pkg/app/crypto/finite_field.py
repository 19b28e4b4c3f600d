"""
Prime-field scalars and dense polynomials over GF(p), p = 2^61 - 1.

The same prime is the circuit field and the order of the pairing groups.
`FieldElement` is the public value type; hot paths (witness synthesis, QAP
arithmetic) work on canonical Python ints in [0, p) and only wrap results
when they leave the crypto layer.

Polynomial multiplication switches from schoolbook to Kronecker substitution
(pack coefficients into one big integer, let CPython multiply, unpack) once
both operands are longer than `_SCHOOLBOOK_CUTOFF`.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence, Union

P = (1 << 61) - 1  # Mersenne prime 2^61 - 1 = 2305843009213693951
FIELD_BYTES = 8

_SCHOOLBOOK_CUTOFF = 32


class DivisionByZero(ZeroDivisionError):
    """Inversion of the zero field element."""


class ZeroDivisor(ZeroDivisionError):
    """Polynomial division by the zero polynomial."""


class DuplicateAbscissa(ValueError):
    """Interpolation points share an x coordinate."""


# ----------------------------------------------------------------------
# Scalars
# ----------------------------------------------------------------------
@dataclass(frozen=True, slots=True)
class FieldElement:
    value: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "value", int(self.value) % P)

    @classmethod
    def from_signed(cls, v: int) -> "FieldElement":
        """-k is represented as p - k."""
        return cls(v % P)

    def to_signed(self) -> int:
        """Inverse of `from_signed` for |v| < p/2."""
        return to_signed(self.value)

    # arithmetic -------------------------------------------------------
    def __add__(self, other: "FieldLike") -> "FieldElement":
        return FieldElement((self.value + _raw(other)) % P)

    __radd__ = __add__

    def __sub__(self, other: "FieldLike") -> "FieldElement":
        return FieldElement((self.value - _raw(other)) % P)

    def __rsub__(self, other: "FieldLike") -> "FieldElement":
        return FieldElement((_raw(other) - self.value) % P)

    def __neg__(self) -> "FieldElement":
        return FieldElement(-self.value % P)

    def __mul__(self, other: "FieldLike") -> "FieldElement":
        return FieldElement(self.value * _raw(other) % P)

    __rmul__ = __mul__

    def __truediv__(self, other: "FieldLike") -> "FieldElement":
        return self * FieldElement(inv(_raw(other)))

    def __pow__(self, k: int) -> "FieldElement":
        return field_pow(self, k)

    def inverse(self) -> "FieldElement":
        return FieldElement(inv(self.value))

    def __int__(self) -> int:
        return self.value

    def __bool__(self) -> bool:
        return self.value != 0

    def __repr__(self) -> str:
        return f"F({self.value})"


FieldLike = Union[FieldElement, int]


def _raw(x: FieldLike) -> int:
    return x.value if isinstance(x, FieldElement) else int(x) % P


def to_signed(v: int) -> int:
    """Canonical residue -> signed integer in (-p/2, p/2]."""
    return v - P if v > P // 2 else v


def inv(x: int) -> int:
    x %= P
    if x == 0:
        raise DivisionByZero("inverse of zero in GF(2^61-1)")
    return pow(x, P - 2, P)


def batch_inverse(values: Sequence[int]) -> list[int]:
    """Montgomery's trick: n inversions for the price of one."""
    n = len(values)
    if n == 0:
        return []
    prefix = [1] * n
    acc = 1
    for i, v in enumerate(values):
        if v % P == 0:
            raise DivisionByZero(f"inverse of zero at position {i}")
        prefix[i] = acc
        acc = acc * v % P
    acc_inv = inv(acc)
    out = [0] * n
    for i in range(n - 1, -1, -1):
        out[i] = acc_inv * prefix[i] % P
        acc_inv = acc_inv * values[i] % P
    return out


def field_add(a: FieldElement, b: FieldElement) -> FieldElement:
    return FieldElement((a.value + b.value) % P)


def field_mul(a: FieldElement, b: FieldElement) -> FieldElement:
    return FieldElement(a.value * b.value % P)


def field_inv(a: FieldElement) -> FieldElement:
    return FieldElement(inv(a.value))


def field_pow(a: FieldElement, k: int) -> FieldElement:
    """Square-and-multiply; negative exponents go through the inverse."""
    base = a.value
    if k < 0:
        base, k = inv(base), -k
    result = 1
    while k:
        if k & 1:
            result = result * base % P
        base = base * base % P
        k >>= 1
    return FieldElement(result)


# ----------------------------------------------------------------------
# Raw coefficient-list arithmetic (lowest degree first, canonical ints)
# ----------------------------------------------------------------------
def _strip(c: list[int]) -> list[int]:
    while c and c[-1] == 0:
        c.pop()
    return c


def _schoolbook(a: Sequence[int], b: Sequence[int]) -> list[int]:
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] += ai * bj
    return [c % P for c in out]


def mul_coeffs(a: Sequence[int], b: Sequence[int]) -> list[int]:
    """Product of two coefficient lists (not stripped)."""
    if not a or not b:
        return []
    if min(len(a), len(b)) <= _SCHOOLBOOK_CUTOFF:
        return _schoolbook(a, b)
    # every product coefficient is < min(len) * p^2
    slot = (2 * P.bit_length() + min(len(a), len(b)).bit_length() + 8) // 8
    packed_a = int.from_bytes(b"".join(c.to_bytes(slot, "little") for c in a), "little")
    packed_b = int.from_bytes(b"".join(c.to_bytes(slot, "little") for c in b), "little")
    n_out = len(a) + len(b) - 1
    raw = (packed_a * packed_b).to_bytes(slot * n_out, "little")
    return [int.from_bytes(raw[i : i + slot], "little") % P for i in range(0, slot * n_out, slot)]


def add_coeffs(a: Sequence[int], b: Sequence[int]) -> list[int]:
    if len(a) < len(b):
        a, b = b, a
    out = list(a)
    for i, bi in enumerate(b):
        out[i] = (out[i] + bi) % P
    return out


def sub_coeffs(a: Sequence[int], b: Sequence[int]) -> list[int]:
    out = list(a) + [0] * max(0, len(b) - len(a))
    for i, bi in enumerate(b):
        out[i] = (out[i] - bi) % P
    return out


def scale_coeffs(a: Sequence[int], k: int) -> list[int]:
    k %= P
    return [c * k % P for c in a]


def eval_coeffs(a: Sequence[int], x: int) -> int:
    acc = 0
    for c in reversed(a):
        acc = (acc * x + c) % P
    return acc


# ----------------------------------------------------------------------
# Polynomial
# ----------------------------------------------------------------------
class Polynomial:
    """Dense polynomial over GF(p), coefficients lowest degree first.

    The empty coefficient tuple is the zero polynomial; trailing zeros are
    always stripped so `degree` is canonical.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable[FieldLike] = ()) -> None:
        self.coeffs: tuple[int, ...] = tuple(_strip([_raw(c) for c in coeffs]))

    @classmethod
    def _canonical(cls, coeffs: list[int]) -> "Polynomial":
        """Wrap an already-reduced coefficient list without re-reducing."""
        poly = cls.__new__(cls)
        poly.coeffs = tuple(_strip(coeffs))
        return poly

    @classmethod
    def zero(cls) -> "Polynomial":
        return cls._canonical([])

    @classmethod
    def constant(cls, c: FieldLike) -> "Polynomial":
        return cls([c])

    @property
    def degree(self) -> int:
        """-1 for the zero polynomial."""
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def coefficients(self) -> list[FieldElement]:
        return [FieldElement(c) for c in self.coeffs]

    def evaluate(self, x: FieldLike) -> int:
        return eval_coeffs(self.coeffs, _raw(x))

    def __call__(self, x: FieldLike) -> FieldElement:
        return FieldElement(self.evaluate(x))

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Polynomial) and self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash(self.coeffs)

    def __add__(self, other: "Polynomial") -> "Polynomial":
        return Polynomial._canonical(add_coeffs(self.coeffs, other.coeffs))

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return Polynomial._canonical(sub_coeffs(self.coeffs, other.coeffs))

    def __neg__(self) -> "Polynomial":
        return Polynomial._canonical([-c % P for c in self.coeffs])

    def __mul__(self, other: Union["Polynomial", FieldLike]) -> "Polynomial":
        if isinstance(other, Polynomial):
            return Polynomial._canonical(mul_coeffs(self.coeffs, other.coeffs))
        return Polynomial._canonical(scale_coeffs(self.coeffs, _raw(other)))

    __rmul__ = __mul__

    def __divmod__(self, other: "Polynomial") -> tuple["Polynomial", "Polynomial"]:
        return poly_divmod(self, other)

    def __floordiv__(self, other: "Polynomial") -> "Polynomial":
        return poly_divmod(self, other)[0]

    def __mod__(self, other: "Polynomial") -> "Polynomial":
        return poly_divmod(self, other)[1]

    def __repr__(self) -> str:
        if not self.coeffs:
            return "Polynomial(0)"
        terms = [f"{c}*x^{i}" if i else str(c) for i, c in enumerate(self.coeffs) if c]
        return "Polynomial(" + " + ".join(terms) + ")"


def poly_divmod(n: Polynomial, d: Polynomial) -> tuple[Polynomial, Polynomial]:
    """Euclidean division: n = q*d + r with deg(r) < deg(d)."""
    if d.is_zero():
        raise ZeroDivisor("division by the zero polynomial")
    num = list(n.coeffs)
    den = d.coeffs
    ld = len(den)
    if len(num) < ld:
        return Polynomial.zero(), Polynomial._canonical(num)
    lead_inv = inv(den[-1])
    q = [0] * (len(num) - ld + 1)
    for i in range(len(num) - ld, -1, -1):
        coef = num[i + ld - 1] * lead_inv % P
        q[i] = coef
        if coef:
            for j in range(ld):
                num[i + j] = (num[i + j] - coef * den[j]) % P
    return Polynomial._canonical(q), Polynomial._canonical(num[: ld - 1])


def lagrange_interpolate(points: Sequence[tuple[FieldLike, FieldLike]]) -> Polynomial:
    """Minimal-degree polynomial through `points` (dense, O(m^2))."""
    xs = [_raw(x) for x, _ in points]
    ys = [_raw(y) for _, y in points]
    if len(set(xs)) != len(xs):
        raise DuplicateAbscissa("interpolation abscissas must be distinct")
    m = len(xs)
    if m == 0:
        return Polynomial.zero()

    # Z(x) = prod (x - x_i)
    z = [1]
    for xi in xs:
        z = [((z[k - 1] if k > 0 else 0) - xi * (z[k] if k < len(z) else 0)) % P for k in range(len(z) + 1)]

    acc = [0] * m
    quotients: list[list[int]] = []
    denominators: list[int] = []
    for xi in xs:
        # synthetic division Z / (x - x_i)
        q = [0] * m
        carry = 0
        for k in range(m, 0, -1):
            carry = (z[k] + carry * xi) % P
            q[k - 1] = carry
        quotients.append(q)
        denominators.append(eval_coeffs(q, xi))
    for q, y, w in zip(quotients, ys, batch_inverse(denominators)):
        scale = y * w % P
        if scale:
            for k in range(m):
                acc[k] = (acc[k] + scale * q[k]) % P
    return Polynomial._canonical(acc)
