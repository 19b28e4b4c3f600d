"""
Squared logistic loss and its fixed-point polynomial surrogate.

    L(y, m) = softplus(-y*m)^2
    g = dL/dm   = -2y * S * s(u)
    h = d2L/dm2 = 2 * (s(u)^2 + S * s(u) * s(-u))

with u = -y*m, S = softplus(u), s the logistic function.

Training gradients are NOT computed from these formulas: every node uses the
fixed-point surrogate (the same integers the circuit recomputes), and the
analytic form is only the reference the surrogate is fitted to.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import chebyshev

from app.crypto.r1cs import GradientCircuitParams
from app.utils.fixed_point import decode, encode, horner, horner_array, normalizing_scale

logger = logging.getLogger(__name__)

DEFAULT_TOLERANCE = 2e-2
DEFAULT_GRID = 10_001


class ToleranceNotMet(ValueError):
    """Surrogate error (or its range) is outside the accepted bound."""


def _softplus(u):
    return np.logaddexp(0.0, u)


def _sigmoid(u):
    return np.exp(u - np.logaddexp(0.0, u))


def analytic_loss_grad_hess(y, m):
    """(loss, g, h) of the squared logistic loss; scalars or arrays, y in {-1, +1}."""
    y = np.asarray(y, dtype=np.float64)
    m = np.asarray(m, dtype=np.float64)
    u = -y * m
    sp = _softplus(u)
    s_u = _sigmoid(u)
    s_neg = _sigmoid(-u)
    loss = sp * sp
    g = -2.0 * y * sp * s_u
    h = 2.0 * (s_u * s_u + sp * s_u * s_neg)
    if loss.ndim == 0:
        return float(loss), float(g), float(h)
    return loss, g, h


@dataclass(frozen=True)
class GradientPair:
    g: float
    h: float
    g_fp: int
    h_fp: int


@dataclass(frozen=True)
class LossSpec:
    """Approved surrogate: per-label coefficients in t = m / M, lowest degree first."""
    degree: int
    fraction_bits: int
    margin_clamp: float
    gradient_bound: float
    g_pos: tuple[int, ...]
    g_neg: tuple[int, ...]
    h_pos: tuple[int, ...]
    h_neg: tuple[int, ...]
    max_error_g: float = 0.0
    max_error_h: float = 0.0
    kind: str = "squared-logistic"

    @property
    def margin_fp(self) -> int:
        return encode(self.margin_clamp, self.fraction_bits)

    @property
    def margin_scale(self) -> int:
        return normalizing_scale(self.margin_clamp, self.fraction_bits)

    def clamp_margin(self, m_fp: int) -> int:
        return max(-self.margin_fp, min(self.margin_fp, int(m_fp)))

    def gradients_fp(self, y: int, m_fp: int) -> tuple[int, int]:
        """Surrogate (g_fp, h_fp) for label y in {-1, +1} and a fixed-point margin."""
        f = self.fraction_bits
        t = (self.clamp_margin(m_fp) * self.margin_scale) >> f
        g_c, h_c = (self.g_pos, self.h_pos) if y == 1 else (self.g_neg, self.h_neg)
        return horner(g_c, t, f), horner(h_c, t, f)

    def gradient_pair(self, y: int, m_fp: int) -> GradientPair:
        g_fp, h_fp = self.gradients_fp(y, m_fp)
        return GradientPair(decode(g_fp, self.fraction_bits), decode(h_fp, self.fraction_bits), g_fp, h_fp)

    def gradients_fp_array(self, y: np.ndarray, m_fp: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Vectorized `gradients_fp`; identical integers."""
        f = self.fraction_bits
        m = np.clip(np.asarray(m_fp, dtype=np.int64), -self.margin_fp, self.margin_fp)
        t = (m * self.margin_scale) >> f
        pos = np.asarray(y) == 1
        g = np.where(pos, horner_array(self.g_pos, t, f), horner_array(self.g_neg, t, f))
        h = np.where(pos, horner_array(self.h_pos, t, f), horner_array(self.h_neg, t, f))
        return g.astype(np.int64), h.astype(np.int64)

    def circuit_params(self, n_instances: int, range_bits: int = 24) -> GradientCircuitParams:
        return GradientCircuitParams(
            n_instances=n_instances,
            fraction_bits=self.fraction_bits,
            margin_clamp=self.margin_clamp,
            gradient_bound=self.gradient_bound,
            range_bits=range_bits,
            degree=self.degree,
            g_pos=self.g_pos,
            g_neg=self.g_neg,
            h_pos=self.h_pos,
            h_neg=self.h_neg,
        )


# ----------------------------------------------------------------------
# Fitting
# ----------------------------------------------------------------------
def _fit_fp(t: np.ndarray, target: np.ndarray, degree: int, f: int) -> tuple[int, ...]:
    """Least-squares fit in the Chebyshev basis, converted to power basis, rounded."""
    cheb = chebyshev.chebfit(t, target, degree)
    power = chebyshev.cheb2poly(cheb)
    power = np.pad(power, (0, degree + 1 - len(power)))
    return tuple(encode(c, f) for c in power)


def fit_surrogate(
    degree: int,
    margin_clamp: float = 6.0,
    grid_size: int = DEFAULT_GRID,
    fraction_bits: int = 16,
    gradient_bound: float = 32.0,
    tolerance: float = DEFAULT_TOLERANCE,
) -> LossSpec:
    """
    Fit fixed-point surrogates of g and h for both labels over [-M, M].

    The error is measured after quantization: margins are encoded, normalized
    and pushed through the fixed-point Horner evaluation, then compared with
    the analytic derivatives on the grid. Every representable clamped margin
    is also checked against the circuit's ranges (|g| < B, 0 <= h < B); h is
    shifted up if quantization leaves it slightly negative.
    """
    if degree < 0:
        raise ValueError("degree must be >= 0")
    if grid_size < degree + 1:
        raise ValueError("grid_size must exceed the degree")
    f = fraction_bits
    scale = normalizing_scale(margin_clamp, f)
    m_lim = encode(margin_clamp, f)
    b_fp = encode(gradient_bound, f)

    grid = np.linspace(-margin_clamp, margin_clamp, grid_size)
    t_real = grid / margin_clamp
    t_grid = (np.rint(grid * (1 << f)).astype(np.int64) * scale) >> f
    t_all = (np.arange(-m_lim, m_lim + 1, dtype=np.int64) * scale) >> f

    coeffs: dict[str, tuple[int, ...]] = {}
    errors = {"g": 0.0, "h": 0.0}
    for label, suffix in ((1, "pos"), (-1, "neg")):
        _, g_ref, h_ref = analytic_loss_grad_hess(np.full_like(grid, label), grid)
        g_c = _fit_fp(t_real, g_ref, degree, f)
        h_c = _fit_fp(t_real, h_ref, degree, f)

        h_min = int(horner_array(h_c, t_all, f).min())
        if h_min < 0:
            h_c = (h_c[0] - h_min,) + h_c[1:]

        g_all = horner_array(g_c, t_all, f)
        h_all = horner_array(h_c, t_all, f)
        if np.abs(g_all).max() >= b_fp or h_all.max() >= b_fp:
            raise ToleranceNotMet(f"surrogate leaves the gradient bound {gradient_bound}")

        err_g = float(np.abs(horner_array(g_c, t_grid, f) / (1 << f) - g_ref).max())
        err_h = float(np.abs(horner_array(h_c, t_grid, f) / (1 << f) - h_ref).max())
        errors["g"] = max(errors["g"], err_g)
        errors["h"] = max(errors["h"], err_h)
        coeffs[f"g_{suffix}"] = g_c
        coeffs[f"h_{suffix}"] = h_c

    if max(errors.values()) > tolerance:
        raise ToleranceNotMet(
            f"degree {degree}: max error g={errors['g']:.4g} h={errors['h']:.4g} > {tolerance}"
        )
    return LossSpec(
        degree=degree,
        fraction_bits=f,
        margin_clamp=margin_clamp,
        gradient_bound=gradient_bound,
        max_error_g=errors["g"],
        max_error_h=errors["h"],
        **coeffs,
    )


def build_loss_spec(
    degree: int = 6,
    max_degree: int = 16,
    margin_clamp: float = 6.0,
    fraction_bits: int = 16,
    gradient_bound: float = 32.0,
    tolerance: float = DEFAULT_TOLERANCE,
) -> LossSpec:
    """`fit_surrogate`, raising the degree until the tolerance is met."""
    last: ToleranceNotMet | None = None
    for d in range(degree, max_degree + 1):
        try:
            spec = fit_surrogate(d, margin_clamp, DEFAULT_GRID, fraction_bits, gradient_bound, tolerance)
        except ToleranceNotMet as e:
            last = e
            continue
        if d != degree:
            logger.warning("surrogate degree %d missed tolerance %.3g; using degree %d", degree, tolerance, d)
        logger.info("surrogate: degree=%d err_g=%.3g err_h=%.3g", d, spec.max_error_g, spec.max_error_h)
        return spec
    raise ToleranceNotMet(f"no degree in [{degree}, {max_degree}] meets tolerance {tolerance}: {last}")
