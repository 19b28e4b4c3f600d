"""
Evaluation domain {1, 2, ..., m} for the QAP.

Consecutive integers give closed-form barycentric weights
    Z'(j) = prod_{k != j} (j - k) = (-1)^(m-j) * (j-1)! * (m-j)!
so Lagrange-basis evaluation at a point is O(m), and interpolation runs up
a subproduct tree of (x - j) factors instead of the O(m^2) dense routine.
Division by Z(x) uses a cached power-series reciprocal of reversed Z.
Results are bit-identical to `lagrange_interpolate` / `poly_divmod`.
"""
from __future__ import annotations

from typing import Sequence

from app.crypto.finite_field import (
    P,
    Polynomial,
    add_coeffs,
    batch_inverse,
    inv,
    mul_coeffs,
    sub_coeffs,
)


class EvaluationDomain:
    def __init__(self, size: int) -> None:
        if size < 1:
            raise ValueError("evaluation domain needs at least one point")
        self.size = size

        fact = [1] * (size + 1)
        for i in range(1, size + 1):
            fact[i] = fact[i - 1] * i % P
        inv_fact = [1] * (size + 1)
        inv_fact[size] = inv(fact[size])
        for i in range(size, 0, -1):
            inv_fact[i - 1] = inv_fact[i] * i % P

        # 1 / Z'(j) for j = 1..m
        self._inv_weights = [
            (inv_fact[j - 1] * inv_fact[size - j] * (1 if (size - j) % 2 == 0 else P - 1)) % P
            for j in range(1, size + 1)
        ]
        self._tree = self._build_tree()
        self.vanishing = Polynomial._canonical(list(self._tree[-1][0]))
        self._reciprocal: list[int] | None = None

    @property
    def points(self) -> range:
        return range(1, self.size + 1)

    # ------------------------------------------------------------------
    # Subproduct tree
    # ------------------------------------------------------------------
    def _build_tree(self) -> list[list[list[int]]]:
        level = [[(-j) % P, 1] for j in self.points]
        tree = [level]
        while len(level) > 1:
            nxt = [mul_coeffs(level[i], level[i + 1]) for i in range(0, len(level) - 1, 2)]
            if len(level) % 2:
                nxt.append(level[-1])
            tree.append(nxt)
            level = nxt
        return tree

    def interpolate(self, values: Sequence[int]) -> Polynomial:
        """Polynomial of degree < m with P(j) = values[j-1]."""
        if len(values) != self.size:
            raise ValueError(f"expected {self.size} evaluations, got {len(values)}")
        nums = [[v * w % P] for v, w in zip(values, self._inv_weights)]
        for level in self._tree[:-1]:
            nxt = []
            for i in range(0, len(level) - 1, 2):
                nxt.append(add_coeffs(mul_coeffs(nums[i], level[i + 1]), mul_coeffs(nums[i + 1], level[i])))
            if len(level) % 2:
                nxt.append(nums[-1])
            nums = nxt
        return Polynomial._canonical(list(nums[0]))

    # ------------------------------------------------------------------
    # Point evaluations
    # ------------------------------------------------------------------
    def lagrange_basis_at(self, s: int) -> list[int]:
        """[L_1(s), ..., L_m(s)]; s must lie outside the domain."""
        s %= P
        zs = self.vanishing.evaluate(s)
        if zs == 0:
            raise ValueError("point lies on the evaluation domain")
        dinv = batch_inverse([(s - j) % P for j in self.points])
        return [zs * w % P * d % P for w, d in zip(self._inv_weights, dinv)]

    # ------------------------------------------------------------------
    # Division by Z
    # ------------------------------------------------------------------
    def _reciprocal_series(self) -> list[int]:
        """Inverse of reversed Z modulo x^(m+1) via Newton iteration."""
        if self._reciprocal is None:
            rev_z = list(reversed(self.vanishing.coeffs))
            target = self.size + 1
            g = [1]
            prec = 1
            while prec < target:
                prec = min(2 * prec, target)
                t = mul_coeffs(rev_z[:prec], g)[:prec]
                t = [(-c) % P for c in t] + [0] * (prec - len(t))
                t[0] = (t[0] + 2) % P
                g = mul_coeffs(g, t)[:prec]
            self._reciprocal = g
        return self._reciprocal

    def divide_by_vanishing(self, n: Polynomial) -> tuple[Polynomial, Polynomial]:
        """(q, r) with n = q*Z + r, deg r < m. Requires deg n <= 2m."""
        m = self.size
        if n.degree < m:
            return Polynomial.zero(), n
        if n.degree > 2 * m:
            raise ValueError("numerator degree exceeds 2m")
        k = n.degree - m + 1
        rev_n = list(reversed(n.coeffs))[:k]
        rev_q = mul_coeffs(rev_n, self._reciprocal_series()[:k])[:k]
        rev_q += [0] * (k - len(rev_q))
        q = Polynomial._canonical(list(reversed(rev_q)))
        r = sub_coeffs(n.coeffs, mul_coeffs(q.coeffs, self.vanishing.coeffs))[:m]
        return q, Polynomial._canonical(r)
