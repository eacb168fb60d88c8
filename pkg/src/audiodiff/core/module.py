"""Parameter containers and the standard layers the models are built from.

Layers draw their initial weights from an explicit Rng stream passed at
construction, so model builds are deterministic end to end.
"""

from __future__ import annotations

import numpy as np

from . import ops
from .rng import Rng
from .tensor import DEFAULT_DTYPE, Tensor


class Module:
    def __init__(self):
        object.__setattr__(self, "_params", {})
        object.__setattr__(self, "_children", {})

    def __setattr__(self, name, value):
        if isinstance(value, Tensor):
            self._params[name] = value
        elif isinstance(value, Module):
            self._children[name] = value
        elif isinstance(value, ModuleList):
            self._children[name] = value
        object.__setattr__(self, name, value)

    def named_parameters(self, prefix: str = ""):
        for name, p in self._params.items():
            yield (f"{prefix}{name}", p)
        for name, child in self._children.items():
            yield from child.named_parameters(prefix=f"{prefix}{name}.")

    def parameters(self):
        return [p for _, p in self.named_parameters()]

    def zero_grad(self):
        for p in self.parameters():
            p.grad = None

    def num_parameters(self) -> int:
        return sum(p.size for p in self.parameters())

    def state_dict(self) -> dict[str, np.ndarray]:
        return {name: p.data.copy() for name, p in self.named_parameters()}

    def load_state_dict(self, state: dict[str, np.ndarray]) -> None:
        own = dict(self.named_parameters())
        missing = sorted(set(own) - set(state))
        unexpected = sorted(set(state) - set(own))
        if missing or unexpected:
            raise KeyError(f"state dict mismatch: missing={missing} unexpected={unexpected}")
        for name, p in own.items():
            arr = np.asarray(state[name], dtype=p.dtype)
            if arr.shape != p.shape:
                raise ValueError(f"shape mismatch for {name}: {arr.shape} vs {p.shape}")
            p.data = np.ascontiguousarray(arr)


class ModuleList(Module):
    def __init__(self, modules=()):
        super().__init__()
        self._list = []
        for m in modules:
            self.append(m)

    def append(self, module: Module):
        self._children[str(len(self._list))] = module
        self._list.append(module)
        return self

    def __iter__(self):
        return iter(self._list)

    def __len__(self):
        return len(self._list)

    def __getitem__(self, i):
        return self._list[i]


def _param(rng: Rng, shape, scale: float, dtype, name: str) -> Tensor:
    data = (rng.normal(shape) * scale).astype(dtype)
    return Tensor(data, requires_grad=True, name=name)


class Linear(Module):
    def __init__(self, d_in: int, d_out: int, rng: Rng, bias: bool = True, dtype=None):
        super().__init__()
        dtype = dtype or DEFAULT_DTYPE
        self.weight = _param(rng.stream("w"), (d_in, d_out), 1.0 / np.sqrt(d_in), dtype, "linear.w")
        self.bias = Tensor(np.zeros(d_out, dtype=dtype), requires_grad=True, name="linear.b") if bias else None

    def __call__(self, x: Tensor) -> Tensor:
        y = x @ self.weight
        if self.bias is not None:
            y = y + self.bias
        return y


class Conv1d(Module):
    def __init__(
        self,
        c_in: int,
        c_out: int,
        kernel: int,
        rng: Rng,
        stride: int = 1,
        padding: str = "same",
        bias: bool = True,
        dtype=None,
    ):
        super().__init__()
        dtype = dtype or DEFAULT_DTYPE
        self.stride = stride
        self.padding = padding
        scale = 1.0 / np.sqrt(c_in * kernel)
        self.weight = _param(rng.stream("w"), (c_out, c_in, kernel), scale, dtype, "conv.w")
        self.bias = Tensor(np.zeros(c_out, dtype=dtype), requires_grad=True, name="conv.b") if bias else None

    def __call__(self, x: Tensor, padding_mode: str | None = None) -> Tensor:
        y = ops.conv1d(x, self.weight, padding_mode or self.padding, self.stride)
        if self.bias is not None:
            y = y + self.bias.reshape(1, -1, 1)
        return y


class GroupNorm(Module):
    """Statistics over (channels/group, time) per example; non-causal in time.
    Used by the codec only; the denoiser uses ChannelAffine."""

    def __init__(self, channels: int, groups: int = 8, eps: float = 1e-5, dtype=None):
        super().__init__()
        dtype = dtype or DEFAULT_DTYPE
        self.groups = min(groups, channels)
        while channels % self.groups:
            self.groups -= 1
        self.eps = eps
        self.gamma = Tensor(np.ones(channels, dtype=dtype), requires_grad=True, name="gn.gamma")
        self.beta = Tensor(np.zeros(channels, dtype=dtype), requires_grad=True, name="gn.beta")

    def __call__(self, x: Tensor) -> Tensor:
        return ops.group_norm(x, self.groups, self.gamma, self.beta, self.eps)


class ChannelAffine(Module):
    """Learned per-channel scale and shift with no reduction over time, so it
    is exactly causal and identical across denoiser modes."""

    def __init__(self, channels: int, dtype=None):
        super().__init__()
        dtype = dtype or DEFAULT_DTYPE
        self.gamma = Tensor(np.ones(channels, dtype=dtype), requires_grad=True, name="affine.gamma")
        self.beta = Tensor(np.zeros(channels, dtype=dtype), requires_grad=True, name="affine.beta")

    def __call__(self, x: Tensor) -> Tensor:
        return x * self.gamma.reshape(1, -1, 1) + self.beta.reshape(1, -1, 1)


class Embedding(Module):
    def __init__(self, vocab: int, dim: int, rng: Rng, dtype=None):
        super().__init__()
        dtype = dtype or DEFAULT_DTYPE
        self.table = _param(rng.stream("table"), (vocab, dim), 0.1, dtype, "embed.table")

    def __call__(self, ids: np.ndarray) -> Tensor:
        from .tensor import embedding

        return embedding(self.table, ids)
