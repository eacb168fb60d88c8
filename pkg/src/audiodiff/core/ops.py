"""Neural ops on top of the tensor primitives: conv1d, attention, norms.

conv1d dispatches its inner loops to the selected kernel backend (compiled
or numpy); attention and group_norm are fused ops with hand-derived
backwards, validated against finite differences in the gradient suite.
"""

from __future__ import annotations

import math

import numpy as np

from . import kernels
from .tensor import ShapeError, Tensor, _make

NEG_INF = float("-inf")


def _pad_amounts(t: int, kernel: int, stride: int, padding_mode: str) -> tuple[int, int]:
    if padding_mode == "causal":
        return kernel - 1, 0
    if padding_mode == "same":
        tout = -(-t // stride)  # ceil
        total = max((tout - 1) * stride + kernel - t, 0)
        return total // 2, total - total // 2
    if padding_mode == "valid":
        return 0, 0
    raise ValueError(f"unknown padding_mode {padding_mode!r}")


def conv1d(x: Tensor, w: Tensor, padding_mode: str = "same", stride: int = 1) -> Tensor:
    """1D convolution (cross-correlation) over [batch, channels, time].

    ``causal`` pads kernel-1 zeros at the sequence start only, so output t
    depends exclusively on inputs <= t*stride; ``same`` pads symmetrically.
    """
    if x.ndim != 3 or w.ndim != 3:
        raise ShapeError(
            f"conv1d expects x[batch,ch_in,time] and w[ch_out,ch_in,kernel], "
            f"got x{x.shape} w{w.shape}"
        )
    if x.shape[1] != w.shape[1]:
        raise ShapeError(
            f"conv1d channel mismatch: x axis 1 has {x.shape[1]}, "
            f"w axis 1 expects {w.shape[1]}"
        )
    if stride < 1:
        raise ValueError(f"stride must be >= 1, got {stride}")
    kernel = w.shape[2]
    left, right = _pad_amounts(x.shape[2], kernel, stride, padding_mode)
    if kernel > x.shape[2] + left + right:
        raise ShapeError(
            f"kernel {kernel} exceeds padded length {x.shape[2] + left + right}"
        )

    xd = np.ascontiguousarray(x.data)
    wd = np.ascontiguousarray(w.data)
    if left or right:
        xp = np.zeros(xd.shape[:2] + (xd.shape[2] + left + right,), dtype=xd.dtype)
        xp[:, :, left : left + xd.shape[2]] = xd
    else:
        xp = xd
    out = kernels.conv1d_forward(xp, wd, stride)
    t_pad = xp.shape[2]
    t_in = xd.shape[2]

    def bw(g):
        g = np.ascontiguousarray(g)
        gx = kernels.conv1d_backward_input(g, wd, stride, t_pad)
        if left or right:
            gx = np.ascontiguousarray(gx[:, :, left : left + t_in])
        gw = kernels.conv1d_backward_weight(g, xp, stride, kernel)
        return gx, gw

    return _make(out, (x, w), bw, "conv1d")


def softmax(x: Tensor, axis: int = -1) -> Tensor:
    shifted = x.data - x.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    out = e / e.sum(axis=axis, keepdims=True)

    def bw(g):
        dot = (g * out).sum(axis=axis, keepdims=True)
        return ((g - dot) * out,)

    return _make(out, (x,), bw, "softmax")


def _attention_bias(mask, t_q: int, t_k: int, dtype) -> np.ndarray | None:
    if mask is None:
        return None
    if isinstance(mask, str):
        if mask != "causal":
            raise ValueError(f"unknown mask {mask!r}")
        bias = np.zeros((t_q, t_k), dtype=dtype)
        bias[np.triu_indices(t_q, k=1 + (t_k - t_q))] = NEG_INF
        return bias
    bias = mask.data if isinstance(mask, Tensor) else np.asarray(mask, dtype=dtype)
    bias = np.broadcast_to(bias.astype(dtype, copy=False), (t_q, t_k))
    return bias


def attention(q: Tensor, k: Tensor, v: Tensor, mask=None) -> Tensor:
    """Scaled dot-product attention over [batch, heads, time, dim].

    ``mask`` is None, "causal" (additive -inf strictly above the diagonal) or
    an explicit additive bias broadcastable to [time_q, time_k].  A row whose
    allowed set is empty is a contract violation.
    """
    if q.ndim != 4 or k.ndim != 4 or v.ndim != 4:
        raise ShapeError(f"attention expects 4-D q/k/v, got {q.shape}/{k.shape}/{v.shape}")
    if q.shape[-1] != k.shape[-1] or k.shape[:2] != v.shape[:2] or k.shape[2] != v.shape[2]:
        raise ShapeError(
            f"attention dims disagree: q{q.shape} k{k.shape} v{v.shape}"
        )
    t_q, t_k = q.shape[2], k.shape[2]
    bias = _attention_bias(mask, t_q, t_k, q.dtype)
    if bias is not None and np.any(np.all(np.isneginf(bias), axis=-1)):
        raise ValueError("attention mask disallows every key for some query row")

    scale = 1.0 / math.sqrt(q.shape[-1])
    scores = (q.data @ np.swapaxes(k.data, -1, -2)) * scale
    if bias is not None:
        scores = scores + bias
    scores -= scores.max(axis=-1, keepdims=True)
    probs = np.exp(scores)
    probs /= probs.sum(axis=-1, keepdims=True)
    out = probs @ v.data

    def bw(g):
        gv = np.swapaxes(probs, -1, -2) @ g
        gp = g @ np.swapaxes(v.data, -1, -2)
        ds = (gp - (gp * probs).sum(axis=-1, keepdims=True)) * probs
        gq = (ds @ k.data) * scale
        gk = (np.swapaxes(ds, -1, -2) @ q.data) * scale
        return gq, gk, gv

    return _make(out, (q, k, v), bw, "attention")


def group_norm(x: Tensor, num_groups: int, gamma: Tensor, beta: Tensor, eps: float = 1e-5) -> Tensor:
    """Per-example normalization over (channels/group, time) with per-channel
    affine.  Statistics reduce over time, so this op is non-causal; the
    denoiser uses plain channel affine instead (see module layer)."""
    b, c, t = x.shape
    if c % num_groups:
        raise ShapeError(f"channels {c} not divisible by {num_groups} groups")
    xg = x.data.reshape(b, num_groups, -1)
    mu = xg.mean(axis=2, keepdims=True)
    var = xg.var(axis=2, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    xhat = ((xg - mu) * inv).reshape(b, c, t)
    gam = gamma.data.reshape(1, c, 1)
    out = xhat * gam + beta.data.reshape(1, c, 1)

    def bw(g):
        dgamma = (g * xhat).sum(axis=(0, 2))
        dbeta = g.sum(axis=(0, 2))
        dxhat = (g * gam).reshape(b, num_groups, -1)
        xh = xhat.reshape(b, num_groups, -1)
        m1 = dxhat.mean(axis=2, keepdims=True)
        m2 = (dxhat * xh).mean(axis=2, keepdims=True)
        dx = ((dxhat - m1 - xh * m2) * inv).reshape(b, c, t)
        return dx, dgamma.astype(x.dtype, copy=False), dbeta.astype(x.dtype, copy=False)

    return _make(out, (x, gamma, beta), bw, "group_norm")


def frame(x: Tensor, size: int, hop: int) -> Tensor:
    """Slice [..., time] into [..., n_frames, size] windows with the given hop."""
    t = x.shape[-1]
    if t < size:
        raise ShapeError(f"frame size {size} exceeds signal length {t}")
    n = 1 + (t - size) // hop
    idx = hop * np.arange(n)[:, None] + np.arange(size)[None, :]
    out = np.ascontiguousarray(x.data[..., idx])

    def bw(g):
        gx = np.zeros_like(x.data)
        for j in range(size):
            gx[..., j + hop * np.arange(n)] += g[..., :, j]
        return (gx,)

    return _make(out, (x,), bw, "frame")


def mse(a: Tensor, b: Tensor) -> Tensor:
    d = a - b
    return (d * d).mean()


def l1(a: Tensor, b: Tensor) -> Tensor:
    return (a - b).abs().mean()
