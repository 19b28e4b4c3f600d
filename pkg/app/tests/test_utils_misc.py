# test_utils_misc.py

import os

import numpy as np
import pytest

from app.utils.fixed_point import (
    decode,
    encode,
    fixed_mul,
    fixed_mul_parts,
    horner,
    horner_array,
    normalizing_scale,
)
from app.utils.misc import Stopwatch, median_ms, resolve_threads


@pytest.mark.parametrize("requested,expected", [(1, 1), (3, 3), (-2, 1)])
def test_resolve_threads_explicit(requested, expected):
    assert resolve_threads(requested) == expected


def test_resolve_threads_auto():
    assert resolve_threads(0) == max(1, os.cpu_count() or 1)
    assert resolve_threads(None) == resolve_threads(0)


def test_median_ms():
    assert median_ms([3.0, 1.0, 2.0]) == 2.0
    assert median_ms([]) == 0.0


def test_stopwatch_measures_something():
    with Stopwatch() as sw:
        sum(range(1000))
    assert sw.elapsed_ms >= 0.0


# ------------------------
# Fixed point
# ------------------------
def test_encode_decode():
    assert encode(1.5, 8) == 384
    assert encode(-0.2, 16) == -13107
    assert decode(384, 8) == 1.5


def test_fixed_mul_example():
    # 1.5 * 2.0 = 3.0 at f = 8
    assert fixed_mul(384, 512, 8) == 768


@pytest.mark.parametrize("a,b", [(384, 512), (-777, 300), (5, -3), (0, 12345)])
def test_fixed_mul_parts_remainder(a, b):
    c, r = fixed_mul_parts(a, b, 8)
    assert a * b == c * 256 + r
    assert 0 <= r < 256


def test_horner_matches_array(rng):
    coeffs = [int(c) for c in rng.integers(-(1 << 17), 1 << 17, size=5)]
    x = rng.integers(-(1 << 16), 1 << 16, size=50)
    assert horner_array(coeffs, x, 16).tolist() == [horner(coeffs, int(v), 16) for v in x]
    assert horner([], 3, 16) == 0
    assert np.all(horner_array([], x, 16) == 0)


def test_normalizing_scale():
    assert normalizing_scale(6.0, 16) == round(65536 / 6)
