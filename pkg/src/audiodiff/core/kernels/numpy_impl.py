"""Pure-numpy conv kernels (im2col + BLAS matmul).

All three entry points operate on pre-padded inputs; padding-mode logic lives
in the op layer.  Shapes: x [B, Cin, T], w [Cout, Cin, K], y [B, Cout, Tout]
with Tout = (T - K) // stride + 1.
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import as_strided

BACKEND = "numpy"


def _im2col(x: np.ndarray, kernel: int, stride: int) -> np.ndarray:
    b, cin, t = x.shape
    tout = (t - kernel) // stride + 1
    sb, sc, st = x.strides
    cols = as_strided(
        x,
        shape=(b, cin, tout, kernel),
        strides=(sb, sc, st * stride, st),
        writeable=False,
    )
    return cols


def conv1d_forward(x: np.ndarray, w: np.ndarray, stride: int) -> np.ndarray:
    b, cin, t = x.shape
    cout, _, kernel = w.shape
    tout = (t - kernel) // stride + 1
    cols = _im2col(x, kernel, stride)  # [b, cin, tout, k]
    mat = cols.transpose(0, 2, 1, 3).reshape(b * tout, cin * kernel)
    y = mat @ w.reshape(cout, cin * kernel).T
    return np.ascontiguousarray(y.reshape(b, tout, cout).transpose(0, 2, 1))


def conv1d_backward_input(
    g: np.ndarray, w: np.ndarray, stride: int, t_in: int
) -> np.ndarray:
    b, cout, tout = g.shape
    _, cin, kernel = w.shape
    gmat = g.transpose(0, 2, 1).reshape(b * tout, cout)
    gcols = gmat @ w.reshape(cout, cin * kernel)  # [b*tout, cin*k]
    gcols = gcols.reshape(b, tout, cin, kernel)
    gx = np.zeros((b, cin, t_in), dtype=g.dtype)
    base = np.arange(tout) * stride
    for k in range(kernel):
        # windows overlap for stride < kernel, so accumulate per tap
        gx[:, :, base + k] += gcols[:, :, :, k].transpose(0, 2, 1)
    return gx


def conv1d_backward_weight(
    g: np.ndarray, x: np.ndarray, stride: int, kernel: int
) -> np.ndarray:
    b, cout, tout = g.shape
    _, cin, _ = x.shape
    cols = _im2col(x, kernel, stride)
    mat = cols.transpose(0, 2, 1, 3).reshape(b * tout, cin * kernel)
    gmat = g.transpose(0, 2, 1).reshape(b * tout, cout)
    gw = gmat.T @ mat  # [cout, cin*k]
    return gw.reshape(cout, cin, kernel)
