"""
Wire layout for public inputs and proofs.

    [8-byte count, little endian][count x 8-byte field value, little endian]

A proof is three (side tag, payload) pairs, i.e. six values:
tag 1 = G1, 2 = G2, 3 = GT; payload is the backend's integer serialization.
"""
from __future__ import annotations

import struct
from typing import Sequence

from app.crypto.bilinear import PairingGroup, Side
from app.crypto.finite_field import FIELD_BYTES, P, FieldElement, FieldLike
from app.crypto.snark import Proof

_SIDE_TAGS = {Side.G1: 1, Side.G2: 2, Side.GT: 3}
_TAG_SIDES = {v: k for k, v in _SIDE_TAGS.items()}


class CodecError(ValueError):
    """Malformed wire bytes."""


def encode_field_values(values: Sequence[FieldLike]) -> bytes:
    raw = [v.value if isinstance(v, FieldElement) else int(v) % P for v in values]
    return struct.pack(f"<Q{len(raw)}Q", len(raw), *raw)


def decode_field_values(data: bytes) -> tuple[int, ...]:
    if len(data) < FIELD_BYTES:
        raise CodecError("missing length prefix")
    (count,) = struct.unpack_from("<Q", data)
    if len(data) != FIELD_BYTES * (count + 1):
        raise CodecError(f"length prefix says {count} values, payload has {len(data) // FIELD_BYTES - 1}")
    values = struct.unpack_from(f"<{count}Q", data, FIELD_BYTES)
    if any(v >= P for v in values):
        raise CodecError("non-canonical field value")
    return values


def encode_proof(proof: Proof) -> bytes:
    out: list[int] = []
    for el in (proof.piA, proof.piB, proof.piC):
        out += [_SIDE_TAGS[el.side], el.group.serialize(el)]
    return encode_field_values(out)


def decode_proof(data: bytes, group: PairingGroup) -> Proof:
    values = decode_field_values(data)
    if len(values) != 6:
        raise CodecError(f"a proof has 6 values, got {len(values)}")
    elements = []
    for tag, payload in zip(values[::2], values[1::2]):
        if tag not in _TAG_SIDES:
            raise CodecError(f"unknown side tag {tag}")
        elements.append(group.deserialize(_TAG_SIDES[tag], payload))
    return Proof(*elements)
