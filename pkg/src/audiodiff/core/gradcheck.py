"""Central finite-difference gradient checking (float64)."""

from __future__ import annotations

import numpy as np

from .tensor import Tensor


def numerical_grad(fn, x: Tensor, eps: float = 1e-6) -> np.ndarray:
    """Central finite differences of a scalar-valued fn wrt every entry of x."""
    g = np.zeros_like(x.data)
    flat = x.data.reshape(-1)
    gflat = g.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        h = eps * max(1.0, abs(orig))
        flat[i] = orig + h
        up = float(fn().data)
        flat[i] = orig - h
        dn = float(fn().data)
        flat[i] = orig
        gflat[i] = (up - dn) / (2.0 * h)
    return g


def rel_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    denom = max(float(np.abs(numeric).max()), 1e-8)
    return float(np.abs(analytic - numeric).max()) / denom


def check_gradients(fn, wrt: list[Tensor], eps: float = 1e-6) -> float:
    """Run fn once with autodiff, compare against finite differences for each
    tensor in wrt; returns the worst relative error."""
    for t in wrt:
        t.grad = None
    loss = fn()
    loss.backward()
    worst = 0.0
    for t in wrt:
        assert t.grad is not None, "missing analytic gradient"
        num = numerical_grad(fn, t, eps)
        worst = max(worst, rel_error(t.grad, num))
    return worst
