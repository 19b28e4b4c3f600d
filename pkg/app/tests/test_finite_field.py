# test_finite_field.py

import numpy as np
import pytest

from app.crypto.finite_field import (
    P,
    DivisionByZero,
    DuplicateAbscissa,
    FieldElement,
    Polynomial,
    ZeroDivisor,
    batch_inverse,
    field_add,
    field_inv,
    field_mul,
    field_pow,
    inv,
    lagrange_interpolate,
    mul_coeffs,
    poly_divmod,
    to_signed,
)


def _rand_ints(rng, n):
    # numpy cannot draw above 2^63 directly; two 31-bit halves cover [0, p)
    hi = rng.integers(0, 1 << 30, size=n)
    lo = rng.integers(0, 1 << 31, size=n)
    return [(int(h) << 31 | int(l)) % P for h, l in zip(hi, lo)]


def test_canonical_form_and_wraparound():
    assert FieldElement(P).value == 0
    assert FieldElement(-1).value == P - 1
    assert field_add(FieldElement(P - 1), FieldElement(1)) == FieldElement(0)
    assert field_add(FieldElement(0), FieldElement(7)) == FieldElement(7)


def test_add_mul_match_bigint_oracle(rng):
    a_vals, b_vals = _rand_ints(rng, 200), _rand_ints(rng, 200)
    for a, b in zip(a_vals, b_vals):
        assert field_add(FieldElement(a), FieldElement(b)).value == (a + b) % P
        assert field_mul(FieldElement(a), FieldElement(b)).value == (a * b) % P


def test_inverse_of_two_and_fermat():
    assert inv(2) == (P + 1) // 2 == 1152921504606846976
    assert field_pow(FieldElement(3), P - 1) == FieldElement(1)


def test_mul_by_inverse_is_one(rng):
    for a in _rand_ints(rng, 1000):
        if a == 0:
            continue
        assert FieldElement(a) * field_inv(FieldElement(a)) == FieldElement(1)


def test_inverse_of_zero_raises():
    with pytest.raises(DivisionByZero):
        field_inv(FieldElement(0))
    with pytest.raises(DivisionByZero):
        batch_inverse([3, 0, 5])


def test_field_axioms_on_random_triples(rng):
    vals = _rand_ints(rng, 3 * 2000)
    for a, b, c in zip(vals[0::3], vals[1::3], vals[2::3]):
        x, y, z = FieldElement(a), FieldElement(b), FieldElement(c)
        assert (x + y) + z == x + (y + z)
        assert x * y == y * x
        assert x * (y + z) == x * y + x * z
        assert x + (-x) == FieldElement(0)


def test_batch_inverse_matches_single(rng):
    vals = [v or 1 for v in _rand_ints(rng, 50)]
    assert batch_inverse(vals) == [inv(v) for v in vals]


def test_signed_representation():
    assert to_signed(P - 5) == -5
    assert FieldElement.from_signed(-5).value == P - 5
    assert FieldElement.from_signed(-5).to_signed() == -5


# ------------------------
# Polynomials
# ------------------------
def test_polynomial_strips_trailing_zeros():
    assert Polynomial([1, 2, 0, 0]).degree == 1
    assert Polynomial([0, 0]).is_zero()
    assert Polynomial.zero().degree == -1


def test_divmod_examples():
    q, r = poly_divmod(Polynomial([P - 1, 0, 1]), Polynomial([P - 1, 1]))  # (x^2 - 1) / (x - 1)
    assert q == Polynomial([1, 1])
    assert r.is_zero()

    q, r = poly_divmod(Polynomial([0, 1]), Polynomial([0, 0, 1]))  # x / x^2
    assert q.is_zero()
    assert r == Polynomial([0, 1])


def test_divmod_by_zero_raises():
    with pytest.raises(ZeroDivisor):
        poly_divmod(Polynomial([1, 2]), Polynomial.zero())


def test_divmod_recomposition(rng):
    for _ in range(50):
        n = Polynomial(_rand_ints(rng, int(rng.integers(1, 20))))
        d = Polynomial(_rand_ints(rng, int(rng.integers(1, 8))) + [1])
        q, r = poly_divmod(n, d)
        assert q * d + r == n
        assert r.degree < d.degree


def test_kronecker_product_matches_schoolbook(rng):
    a = _rand_ints(rng, 70)
    b = _rand_ints(rng, 45)
    expected = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            expected[i + j] = (expected[i + j] + x * y) % P
    assert mul_coeffs(a, b) == expected


def test_interpolation_examples():
    assert lagrange_interpolate([(1, 2), (2, 3)]) == Polynomial([1, 1])
    assert lagrange_interpolate([(5, 9)]) == Polynomial.constant(9)


def test_interpolation_duplicate_abscissa():
    with pytest.raises(DuplicateAbscissa):
        lagrange_interpolate([(1, 2), (1, 3)])


@pytest.mark.parametrize("degree", [6, 31, 256])
def test_interpolation_round_trip(degree):
    rng = np.random.default_rng(degree)
    poly = Polynomial(_rand_ints(rng, degree) + [7])
    points = [(x, poly.evaluate(x)) for x in range(1, degree + 2)]
    assert lagrange_interpolate(points) == poly
