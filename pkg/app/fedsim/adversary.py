"""
Byzantine poisoning: gradients with inverted signs and exaggerated magnitude.

    g' = rint(s * kappa * g),  h' = rint(kappa * h),  s = -1 if invert else +1

Attackers apply the map per instance and derive histograms and totals from
the poisoned values, so the public linear check still balances; only the
circuit (whose witness they must forge) catches them. For integer kappa,
`byzantine_perturb` on a histogram equals building it from perturbed values.
"""
from __future__ import annotations

import numpy as np

from app.boosting.histogram import FeatureHistogram
from app.crypto.finite_field import P, to_signed
from app.crypto.r1cs import CircuitLayout, Witness


def _scale(x: np.ndarray, factor: float) -> np.ndarray:
    return np.rint(np.asarray(x, dtype=np.float64) * factor).astype(np.int64)


def perturb_gradients(
    g_fp: np.ndarray, h_fp: np.ndarray, kappa: float, invert: bool = True
) -> tuple[np.ndarray, np.ndarray]:
    sign = -1.0 if invert else 1.0
    return _scale(g_fp, sign * kappa), _scale(h_fp, kappa)


def byzantine_perturb(
    hist: FeatureHistogram, public_inputs: tuple[int, int, int], kappa: float, invert: bool = True
) -> tuple[FeatureHistogram, tuple[int, int, int]]:
    """Poison an update: G (and G_total) -> -kappa*G, H (and H_total) -> kappa*H, counts unchanged."""
    if kappa <= 0:
        raise ValueError("kappa must be > 0")
    sign = -1.0 if invert else 1.0
    poisoned = FeatureHistogram(_scale(hist.grad, sign * kappa), _scale(hist.hess, kappa), hist.count.copy())
    g_tot, h_tot, n = public_inputs
    g_new = int(np.rint(sign * kappa * to_signed(g_tot)))
    h_new = int(np.rint(kappa * to_signed(h_tot)))
    return poisoned, (g_new % P, h_new % P, n)


def forge_witness(w: Witness, layout: CircuitLayout, g_fp: np.ndarray, h_fp: np.ndarray) -> Witness:
    """Overwrite the gradient, hessian and total slots of an honest witness with poisoned values."""
    updates: dict[int, int] = {}
    for var, v in zip(layout.g_vars, g_fp.tolist()):
        updates[var] = v
    for var, v in zip(layout.h_vars, h_fp.tolist()):
        updates[var] = v
    updates[layout.g_total] = int(np.sum(g_fp))
    updates[layout.h_total] = int(np.sum(h_fp))
    return w.replace(updates)
