"""
Fixed-point helpers shared by the circuit synthesizer and the out-of-circuit
gradient path. Both sides MUST go through these functions so the integers they
produce are identical.

Convention: a real x is stored as the integer round(x * 2^f). Products are
rescaled with a floor shift, which is what the circuit's
`a * b = c * 2^f + r, 0 <= r < 2^f` constraint pins down.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np


def encode(x: float, fraction_bits: int) -> int:
    """Real -> fixed point (round half to even, like Python's round)."""
    return int(round(float(x) * (1 << fraction_bits)))


def decode(v: int, fraction_bits: int) -> float:
    return v / float(1 << fraction_bits)


def fixed_mul_parts(a: int, b: int, fraction_bits: int) -> tuple[int, int]:
    """Return (c, r) with a*b = c*2^f + r and 0 <= r < 2^f."""
    prod = a * b
    c = prod >> fraction_bits
    return c, prod - (c << fraction_bits)


def fixed_mul(a: int, b: int, fraction_bits: int) -> int:
    return (a * b) >> fraction_bits


def horner(coeffs: Sequence[int], x: int, fraction_bits: int) -> int:
    """Evaluate sum(c_k x^k) in fixed point; coeffs lowest degree first."""
    if not coeffs:
        return 0
    acc = coeffs[-1]
    for c in reversed(coeffs[:-1]):
        acc = ((acc * x) >> fraction_bits) + c
    return acc


def horner_array(coeffs: Sequence[int], x: np.ndarray, fraction_bits: int) -> np.ndarray:
    """Vectorized `horner` over an int64 array (arithmetic shift == floor)."""
    x = np.asarray(x, dtype=np.int64)
    if not coeffs:
        return np.zeros_like(x)
    acc = np.full_like(x, int(coeffs[-1]))
    for c in reversed(coeffs[:-1]):
        acc = ((acc * x) >> fraction_bits) + int(c)
    return acc


def normalizing_scale(margin_clamp: float, fraction_bits: int) -> int:
    """K = round(2^f / M); fixed_mul(m, K) maps [-M, M] onto roughly [-1, 1]."""
    return round((1 << fraction_bits) / margin_clamp)
