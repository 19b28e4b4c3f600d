# test_loss.py

import logging
import math

import numpy as np
import pytest

from app.boosting.loss import (
    DEFAULT_TOLERANCE,
    ToleranceNotMet,
    analytic_loss_grad_hess,
    build_loss_spec,
    fit_surrogate,
)


def test_analytic_values_at_zero():
    loss, g, h = analytic_loss_grad_hess(1, 0.0)
    assert loss == pytest.approx(math.log(2) ** 2, rel=1e-12)
    assert loss == pytest.approx(0.480453, abs=1e-6)
    assert g == pytest.approx(-math.log(2), rel=1e-12)
    assert h > 0


@pytest.mark.parametrize("y", [1, -1])
@pytest.mark.parametrize("m", [-5.0, -1.3, 0.0, 0.7, 4.2])
def test_analytic_matches_finite_differences(y, m):
    step = 1e-5
    lp, gp, _ = analytic_loss_grad_hess(y, m + step)
    lm, gm, _ = analytic_loss_grad_hess(y, m - step)
    _, g, h = analytic_loss_grad_hess(y, m)
    assert g == pytest.approx((lp - lm) / (2 * step), rel=1e-6, abs=1e-9)
    assert h == pytest.approx((gp - gm) / (2 * step), rel=1e-6, abs=1e-9)


def test_analytic_symmetry(rng):
    m = rng.uniform(-6, 6, size=100)
    _, g_pos, h_pos = analytic_loss_grad_hess(np.ones_like(m), m)
    _, g_neg, h_neg = analytic_loss_grad_hess(-np.ones_like(m), -m)
    np.testing.assert_allclose(g_pos, -g_neg, rtol=1e-12)
    np.testing.assert_allclose(h_pos, h_neg, rtol=1e-12)


def test_analytic_is_stable_for_large_margins():
    loss, g, h = analytic_loss_grad_hess(-1, 800.0)
    assert all(math.isfinite(v) for v in (loss, g, h))


def test_surrogate_within_tolerance(loss_spec):
    assert loss_spec.max_error_g <= DEFAULT_TOLERANCE
    assert loss_spec.max_error_h <= DEFAULT_TOLERANCE
    assert 6 <= loss_spec.degree <= 16
    assert len(loss_spec.g_pos) == loss_spec.degree + 1


def test_constant_surrogate_fails():
    with pytest.raises(ToleranceNotMet):
        fit_surrogate(0)


def test_degree_escalation_warns(caplog):
    with caplog.at_level(logging.WARNING, logger="app.boosting.loss"):
        spec = build_loss_spec(degree=2, max_degree=16)
    assert spec.degree > 2
    assert any("missed tolerance" in r.message for r in caplog.records)


def test_escalation_gives_up():
    with pytest.raises(ToleranceNotMet):
        build_loss_spec(degree=0, max_degree=1)


def test_fixed_point_gradients_respect_bounds(loss_spec):
    m = np.arange(-loss_spec.margin_fp, loss_spec.margin_fp + 1, 97, dtype=np.int64)
    b_fp = round(loss_spec.gradient_bound * (1 << loss_spec.fraction_bits))
    for label in (1, -1):
        g, h = loss_spec.gradients_fp_array(np.full_like(m, label), m)
        assert np.abs(g).max() < b_fp
        assert h.min() >= 0 and h.max() < b_fp


def test_vectorized_matches_scalar(loss_spec, rng):
    y = rng.choice([-1, 1], size=200)
    m = rng.integers(-2 * loss_spec.margin_fp, 2 * loss_spec.margin_fp, size=200)
    g, h = loss_spec.gradients_fp_array(y, m)
    for i in range(200):
        assert (int(g[i]), int(h[i])) == loss_spec.gradients_fp(int(y[i]), int(m[i]))


def test_surrogate_tracks_sign_of_gradient(loss_spec):
    # wrong-side margins push hard, right-side margins barely move
    f = loss_spec.fraction_bits
    pair = loss_spec.gradient_pair(1, -4 << f)
    assert pair.g < -1.0
    pair = loss_spec.gradient_pair(-1, -4 << f)
    assert abs(pair.g) < 0.1
