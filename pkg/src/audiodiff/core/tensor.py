"""Minimal deterministic tensor library with reverse-mode autodiff.

Tensors wrap contiguous numpy arrays (float32 by default, float64 for
gradient tests) and record a backward closure per op.  The graph is acyclic
by construction; ``backward`` runs a topological sweep and populates ``grad``
on every leaf with ``requires_grad``.  A second backward into non-zeroed
leaves raises unless accumulation is requested explicitly.

Op-level finite checks (every forward output scanned for NaN/Inf) are
enabled via :func:`set_finite_checks` or the :func:`finite_checks` context
manager; the training stack additionally checks losses, activations at block
boundaries and gradients regardless of this flag.
"""

from __future__ import annotations

import contextlib
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

DEFAULT_DTYPE = np.float32

_grad_enabled = True
_finite_checks = False


class NumericsError(RuntimeError):
    """Non-finite values appeared where the contract requires finite ones."""


class ShapeError(ValueError):
    """Operand shapes violate an op contract; message names the axes."""


@contextlib.contextmanager
def no_grad():
    global _grad_enabled
    prev = _grad_enabled
    _grad_enabled = False
    try:
        yield
    finally:
        _grad_enabled = prev


def grad_enabled() -> bool:
    return _grad_enabled


def set_finite_checks(on: bool) -> None:
    global _finite_checks
    _finite_checks = bool(on)


@contextlib.contextmanager
def finite_checks(on: bool = True):
    global _finite_checks
    prev = _finite_checks
    _finite_checks = bool(on)
    try:
        yield
    finally:
        _finite_checks = prev


def check_finite(arr: np.ndarray, where: str) -> None:
    if not np.all(np.isfinite(arr)):
        bad = "NaN" if np.any(np.isnan(arr)) else "Inf"
        raise NumericsError(f"{bad} detected in {where}")


def _coerce(data, dtype=None) -> np.ndarray:
    arr = np.asarray(data)
    if dtype is not None:
        arr = arr.astype(dtype, copy=False)
    elif not np.issubdtype(arr.dtype, np.floating):
        arr = arr.astype(DEFAULT_DTYPE)
    return np.ascontiguousarray(arr)


class Tensor:
    __slots__ = ("data", "requires_grad", "grad", "_backward", "_parents", "name")

    def __init__(self, data, requires_grad: bool = False, dtype=None, name: str = ""):
        self.data = _coerce(data, dtype)
        self.requires_grad = bool(requires_grad)
        self.grad: Optional[np.ndarray] = None
        self._backward: Optional[Callable] = None
        self._parents: tuple = ()
        self.name = name

    # -- basic introspection -------------------------------------------------
    @property
    def shape(self) -> tuple:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def dtype(self):
        return self.data.dtype

    @property
    def size(self) -> int:
        return self.data.size

    def __repr__(self):
        return f"Tensor(shape={self.shape}, dtype={self.dtype.name}, grad={self.requires_grad})"

    def item(self) -> float:
        return float(self.data)

    def numpy(self) -> np.ndarray:
        return self.data

    def detach(self) -> "Tensor":
        return Tensor(self.data)

    def zero_grad(self) -> None:
        self.grad = None

    def astype(self, dtype) -> "Tensor":
        if self.requires_grad and _grad_enabled:
            src = self.dtype

            def bw(g):
                return (g.astype(src),)

            return _make(self.data.astype(dtype), (self,), bw, "astype")
        return Tensor(self.data.astype(dtype))

    # -- arithmetic ----------------------------------------------------------
    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return add(self, mul(_wrap(other, self.dtype), -1.0))

    def __rsub__(self, other):
        return add(_wrap(other, self.dtype), mul(self, -1.0))

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, float)):
            return mul(self, 1.0 / other)
        return div(self, other)

    def __rtruediv__(self, other):
        return div(_wrap(other, self.dtype), self)

    def __neg__(self):
        return mul(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)

    def __pow__(self, p):
        return powc(self, p)

    def __getitem__(self, key):
        return getitem(self, key)

    def sum(self, axis=None, keepdims=False):
        return tsum(self, axis, keepdims)

    def mean(self, axis=None, keepdims=False):
        return tmean(self, axis, keepdims)

    def reshape(self, *shape):
        return reshape(self, shape if len(shape) > 1 or isinstance(shape[0], int) else shape[0])

    def transpose(self, *axes):
        return transpose(self, axes)

    def exp(self):
        return texp(self)

    def log(self):
        return tlog(self)

    def sqrt(self):
        return tsqrt(self)

    def abs(self):
        return tabs(self)

    # -- autodiff ------------------------------------------------------------
    def backward(self, accumulate: bool = False) -> None:
        backward(self, accumulate=accumulate)


def _wrap(x, dtype) -> Tensor:
    if isinstance(x, Tensor):
        return x
    return Tensor(np.asarray(x, dtype=dtype))


def _check_same_dtype(a: Tensor, b: Tensor, op: str) -> None:
    if a.dtype != b.dtype:
        raise TypeError(f"{op}: mixed dtypes {a.dtype.name} vs {b.dtype.name}")


def _make(data: np.ndarray, parents: Sequence[Tensor], backward_fn, opname: str) -> Tensor:
    if _finite_checks:
        check_finite(data, f"op {opname}")
    out = Tensor.__new__(Tensor)
    out.data = data
    out.grad = None
    out.name = ""
    if _grad_enabled and any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._parents = tuple(parents)
        out._backward = backward_fn
    else:
        out.requires_grad = False
        out._parents = ()
        out._backward = None
    return out


def _unbroadcast(g: np.ndarray, shape: tuple) -> np.ndarray:
    if g.shape == shape:
        return g
    extra = g.ndim - len(shape)
    if extra > 0:
        g = g.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, s in enumerate(shape) if s == 1 and g.shape[i] != 1)
    if axes:
        g = g.sum(axis=axes, keepdims=True)
    return g.reshape(shape)


def backward(loss: Tensor, accumulate: bool = False) -> None:
    """Reverse-mode sweep from a scalar loss.

    Gradients land on ``grad`` of every reachable leaf with
    ``requires_grad``.  Raises if a leaf already holds a gradient and
    ``accumulate`` is False.
    """
    if loss.data.size != 1:
        raise ShapeError(f"backward requires a scalar loss, got shape {loss.shape}")
    if not loss.requires_grad:
        raise RuntimeError("loss does not require grad; nothing to differentiate")

    topo: list[Tensor] = []
    visited: set[int] = set()
    stack: list[tuple[Tensor, bool]] = [(loss, False)]
    while stack:
        node, processed = stack.pop()
        if processed:
            topo.append(node)
            continue
        if id(node) in visited:
            continue
        visited.add(id(node))
        stack.append((node, True))
        for p in node._parents:
            if p.requires_grad and id(p) not in visited:
                stack.append((p, False))

    if not accumulate:
        for node in topo:
            if node._backward is None and node.grad is not None:
                raise RuntimeError(
                    f"leaf {node.name or '<unnamed>'} already holds a gradient; "
                    "zero gradients first or pass accumulate=True"
                )

    grads: dict[int, np.ndarray] = {id(loss): np.ones_like(loss.data)}
    for node in reversed(topo):
        g = grads.pop(id(node), None)
        if g is None:
            continue
        if node._backward is None:
            node.grad = g if node.grad is None else node.grad + g
            continue
        parent_grads = node._backward(g)
        for p, pg in zip(node._parents, parent_grads):
            if pg is None or not p.requires_grad:
                continue
            cur = grads.get(id(p))
            grads[id(p)] = pg if cur is None else cur + pg


# -- primitive ops -----------------------------------------------------------

def add(a: Tensor, b) -> Tensor:
    b = _wrap(b, a.dtype)
    _check_same_dtype(a, b, "add")
    out = a.data + b.data

    def bw(g):
        return _unbroadcast(g, a.shape), _unbroadcast(g, b.shape)

    return _make(out, (a, b), bw, "add")


def mul(a: Tensor, b) -> Tensor:
    b = _wrap(b, a.dtype)
    _check_same_dtype(a, b, "mul")
    out = a.data * b.data

    def bw(g):
        return _unbroadcast(g * b.data, a.shape), _unbroadcast(g * a.data, b.shape)

    return _make(out, (a, b), bw, "mul")


def div(a: Tensor, b) -> Tensor:
    b = _wrap(b, a.dtype)
    _check_same_dtype(a, b, "div")
    out = a.data / b.data

    def bw(g):
        ga = _unbroadcast(g / b.data, a.shape)
        gb = _unbroadcast(-g * a.data / (b.data * b.data), b.shape)
        return ga, gb

    return _make(out, (a, b), bw, "div")


def matmul(a: Tensor, b: Tensor) -> Tensor:
    _check_same_dtype(a, b, "matmul")
    if a.ndim < 2 or b.ndim < 2:
        raise ShapeError(f"matmul needs >=2-D operands, got {a.shape} @ {b.shape}")
    if a.shape[-1] != b.shape[-2]:
        raise ShapeError(
            f"matmul inner axes disagree: {a.shape}[-1] vs {b.shape}[-2]"
        )
    out = a.data @ b.data

    def bw(g):
        ga = _unbroadcast(g @ np.swapaxes(b.data, -1, -2), a.shape)
        gb = _unbroadcast(np.swapaxes(a.data, -1, -2) @ g, b.shape)
        return ga, gb

    return _make(out, (a, b), bw, "matmul")


def powc(a: Tensor, p: float) -> Tensor:
    if isinstance(p, Tensor):
        raise TypeError("powc supports constant exponents only")
    out = a.data**p

    def bw(g):
        return (g * p * a.data ** (p - 1),)

    return _make(out, (a,), bw, "pow")


def texp(a: Tensor) -> Tensor:
    out = np.exp(a.data)

    def bw(g):
        return (g * out,)

    return _make(out, (a,), bw, "exp")


def tlog(a: Tensor) -> Tensor:
    out = np.log(a.data)

    def bw(g):
        return (g / a.data,)

    return _make(out, (a,), bw, "log")


def tsqrt(a: Tensor) -> Tensor:
    out = np.sqrt(a.data)

    def bw(g):
        return (g * (0.5 / out),)

    return _make(out, (a,), bw, "sqrt")


def tabs(a: Tensor) -> Tensor:
    out = np.abs(a.data)

    def bw(g):
        return (g * np.sign(a.data),)

    return _make(out, (a,), bw, "abs")


def tanh(a: Tensor) -> Tensor:
    out = np.tanh(a.data)

    def bw(g):
        return (g * (1.0 - out * out),)

    return _make(out, (a,), bw, "tanh")


def sigmoid(a: Tensor) -> Tensor:
    out = 1.0 / (1.0 + np.exp(-a.data))

    def bw(g):
        return (g * out * (1.0 - out),)

    return _make(out, (a,), bw, "sigmoid")


def silu(a: Tensor) -> Tensor:
    sig = 1.0 / (1.0 + np.exp(-a.data))
    out = a.data * sig

    def bw(g):
        return (g * (sig * (1.0 + a.data * (1.0 - sig))),)

    return _make(out, (a,), bw, "silu")


def tsum(a: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    out = a.data.sum(axis=axis, keepdims=keepdims)

    def bw(g):
        g = np.asarray(g)
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, a.shape).astype(a.dtype, copy=False),)

    return _make(np.asarray(out), (a,), bw, "sum")


def tmean(a: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    out = a.data.mean(axis=axis, keepdims=keepdims)
    if axis is None:
        count = a.data.size
    else:
        axes = (axis,) if isinstance(axis, int) else axis
        count = int(np.prod([a.shape[ax] for ax in axes]))

    def bw(g):
        g = np.asarray(g) / count
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, a.shape).astype(a.dtype, copy=False),)

    return _make(np.asarray(out), (a,), bw, "mean")


def reshape(a: Tensor, shape) -> Tensor:
    out = a.data.reshape(shape)

    def bw(g):
        return (g.reshape(a.shape),)

    return _make(out, (a,), bw, "reshape")


def transpose(a: Tensor, axes) -> Tensor:
    axes = tuple(axes) if axes else tuple(reversed(range(a.ndim)))
    out = a.data.transpose(axes)
    inv = np.argsort(axes)

    def bw(g):
        return (g.transpose(inv),)

    return _make(out, (a,), bw, "transpose")


def getitem(a: Tensor, key) -> Tensor:
    out = a.data[key]

    def bw(g):
        ga = np.zeros_like(a.data)
        ga[key] = g
        return (ga,)

    return _make(np.ascontiguousarray(out), (a,), bw, "getitem")


def concat(tensors: Iterable[Tensor], axis: int = 0) -> Tensor:
    ts = list(tensors)
    dt = ts[0].dtype
    for t in ts[1:]:
        _check_same_dtype(ts[0], t, "concat")
    out = np.concatenate([t.data for t in ts], axis=axis)
    sizes = [t.shape[axis] for t in ts]
    offsets = np.cumsum([0] + sizes)

    def bw(g):
        slicer = [slice(None)] * g.ndim
        grads = []
        for i in range(len(ts)):
            slicer[axis] = slice(offsets[i], offsets[i + 1])
            grads.append(np.ascontiguousarray(g[tuple(slicer)]))
        return tuple(grads)

    return _make(out, ts, bw, "concat")


def pad_time(a: Tensor, left: int, right: int) -> Tensor:
    """Zero-pad the trailing (time) axis."""
    if left == 0 and right == 0:
        return a
    width = [(0, 0)] * (a.ndim - 1) + [(left, right)]
    out = np.pad(a.data, width)
    t = a.shape[-1]

    def bw(g):
        return (np.ascontiguousarray(g[..., left : left + t]),)

    return _make(out, (a,), bw, "pad_time")


def repeat_time(a: Tensor, factor: int) -> Tensor:
    """Nearest-neighbour upsampling along time: each frame repeated."""
    out = np.repeat(a.data, factor, axis=-1)

    def bw(g):
        return (g.reshape(*a.shape, factor).sum(axis=-1),)

    return _make(out, (a,), bw, "repeat_time")


def embedding(table: Tensor, ids: np.ndarray) -> Tensor:
    ids = np.asarray(ids, dtype=np.int64)
    out = table.data[ids]

    def bw(g):
        gt = np.zeros_like(table.data)
        np.add.at(gt, ids, g)
        return (gt,)

    return _make(np.ascontiguousarray(out), (table,), bw, "embedding")


def where_const(cond: np.ndarray, a: Tensor, other: float) -> Tensor:
    """Select a where cond else the constant; grad flows only through a."""
    out = np.where(cond, a.data, np.asarray(other, dtype=a.dtype))

    def bw(g):
        return (np.where(cond, g, 0.0),)

    return _make(out, (a,), bw, "where_const")
