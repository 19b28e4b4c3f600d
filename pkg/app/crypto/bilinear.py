from __future__ import annotations
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from app.crypto.finite_field import P, FieldElement, FieldLike


class SideMismatch(ValueError):
    """Group law or pairing applied to elements of the wrong sides."""


class Side(str, Enum):
    G1 = "G1"
    G2 = "G2"
    GT = "GT"


def _scalar(k: FieldLike) -> int:
    return k.value if isinstance(k, FieldElement) else int(k) % P


@dataclass(frozen=True, slots=True)
class GroupElement:
    """
    Group element "generator^exponent". The exponent is opaque outside this
    module; only the backend reads it.
    """
    side: Side
    _exponent: int
    group: "PairingGroup" = field(compare=False, repr=False)

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        return self.group.mul(self, other)

    def __pow__(self, k: FieldLike) -> "GroupElement":
        return self.group.exp(self, k)

    def __repr__(self) -> str:
        return f"GroupElement({self.side.value}, #{hash(self) & 0xFFFF:04x})"


class PairingGroup(ABC):
    """Backend interface; a real curve implementation plugs in here."""
    name: str
    order: int = P

    @abstractmethod
    def generator(self, side: Side) -> GroupElement:
        ...

    @abstractmethod
    def identity(self, side: Side) -> GroupElement:
        ...

    @abstractmethod
    def exp(self, base: GroupElement, k: FieldLike) -> GroupElement:
        ...

    @abstractmethod
    def mul(self, a: GroupElement, b: GroupElement) -> GroupElement:
        ...

    @abstractmethod
    def pair(self, a: GroupElement, b: GroupElement) -> GroupElement:
        ...

    @abstractmethod
    def serialize(self, el: GroupElement) -> int:
        """Element -> integer payload for the wire codec."""
        ...

    @abstractmethod
    def deserialize(self, side: Side, payload: int) -> GroupElement:
        ...

    def multi_exp(self, bases: Sequence[GroupElement], scalars: Sequence[FieldLike]) -> GroupElement:
        """prod bases[i]^scalars[i] (generic fallback; backends may specialize)."""
        if len(bases) != len(scalars):
            raise ValueError("multi_exp needs as many scalars as bases")
        if not bases:
            raise ValueError("multi_exp needs at least one base")
        acc = self.identity(bases[0].side)
        for b, k in zip(bases, scalars):
            acc = self.mul(acc, self.exp(b, k))
        return acc

    def random_scalar(self, rng: np.random.Generator, nonzero: bool = True) -> int:
        low = 1 if nonzero else 0
        return int(rng.integers(low, self.order, dtype=np.int64))


class TransparentGroup(PairingGroup):
    """
    Reference backend: every element stores its discrete log in the clear.
    Bilinearity is exact and there is no cryptographic hardness; it checks
    protocol logic, not security.
    """
    name = "transparent"

    def _make(self, side: Side, exponent: int) -> GroupElement:
        return GroupElement(side, exponent % P, self)

    def generator(self, side: Side) -> GroupElement:
        return self._make(side, 1)

    def identity(self, side: Side) -> GroupElement:
        return self._make(side, 0)

    def exp(self, base: GroupElement, k: FieldLike) -> GroupElement:
        return self._make(base.side, base._exponent * _scalar(k))

    def mul(self, a: GroupElement, b: GroupElement) -> GroupElement:
        if a.side != b.side:
            raise SideMismatch(f"cannot combine {a.side.value} with {b.side.value}")
        return self._make(a.side, a._exponent + b._exponent)

    def pair(self, a: GroupElement, b: GroupElement) -> GroupElement:
        if a.side != Side.G1 or b.side != Side.G2:
            raise SideMismatch(f"pairing expects (G1, G2), got ({a.side.value}, {b.side.value})")
        return self._make(Side.GT, a._exponent * b._exponent)

    def multi_exp(self, bases: Sequence[GroupElement], scalars: Sequence[FieldLike]) -> GroupElement:
        if len(bases) != len(scalars):
            raise ValueError("multi_exp needs as many scalars as bases")
        if not bases:
            raise ValueError("multi_exp needs at least one base")
        side = bases[0].side
        acc = 0
        for b, k in zip(bases, scalars):
            if b.side != side:
                raise SideMismatch("multi_exp over mixed sides")
            acc += b._exponent * _scalar(k)
        return self._make(side, acc)

    def serialize(self, el: GroupElement) -> int:
        return el._exponent

    def deserialize(self, side: Side, payload: int) -> GroupElement:
        if not 0 <= payload < P:
            raise ValueError("group payload out of range")
        return self._make(side, payload)


# ----------------------------------------------------------------------
# Operation-style API (elements carry their backend)
# ----------------------------------------------------------------------
def group_exp(base: GroupElement, k: FieldLike) -> GroupElement:
    return base.group.exp(base, k)


def group_mul(a: GroupElement, b: GroupElement) -> GroupElement:
    return a.group.mul(a, b)


def pairing(a: GroupElement, b: GroupElement) -> GroupElement:
    return a.group.pair(a, b)
