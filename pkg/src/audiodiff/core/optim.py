"""AdamW with decoupled weight decay, global-norm clipping and EMA shadows."""

from __future__ import annotations

import numpy as np

from .tensor import Tensor


class OptimizerAbort(RuntimeError):
    """A gradient was non-finite; the step was not applied."""


class AdamW:
    def __init__(
        self,
        named_params: list[tuple[str, Tensor]],
        lr: float = 3e-5,
        betas: tuple[float, float] = (0.9, 0.95),
        eps: float = 1e-8,
        weight_decay: float = 0.1,
        clip_norm: float = 1.0,
        ema_decay: float = 0.999,
    ):
        self.names = [n for n, _ in named_params]
        self.params = [p for _, p in named_params]
        self.lr = lr
        self.beta1, self.beta2 = betas
        self.eps = eps
        self.weight_decay = weight_decay
        self.clip_norm = clip_norm
        self.ema_decay = ema_decay
        self.step_count = 0
        self.m = [np.zeros_like(p.data) for p in self.params]
        self.v = [np.zeros_like(p.data) for p in self.params]
        self.ema = [p.data.copy() for p in self.params]

    def zero_grad(self) -> None:
        for p in self.params:
            p.grad = None

    def grad_norm(self) -> float:
        total = 0.0
        for name, p in zip(self.names, self.params):
            if p.grad is None:
                raise OptimizerAbort(f"missing gradient for parameter {name}")
            if not np.all(np.isfinite(p.grad)):
                raise OptimizerAbort(f"non-finite gradient for parameter {name}")
            total += float(np.sum(p.grad.astype(np.float64) ** 2))
        return float(np.sqrt(total))

    def step(self, lr: float | None = None) -> float:
        """Apply one AdamW update; returns the pre-clip global grad norm."""
        lr = self.lr if lr is None else lr
        norm = self.grad_norm()
        scale = self.clip_norm / norm if (self.clip_norm and norm > self.clip_norm) else 1.0
        self.step_count += 1
        b1c = 1.0 - self.beta1**self.step_count
        b2c = 1.0 - self.beta2**self.step_count
        for p, m, v, shadow in zip(self.params, self.m, self.v, self.ema):
            g = p.grad if scale == 1.0 else p.grad * np.asarray(scale, dtype=p.dtype)
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * (g * g)
            update = (m / b1c) / (np.sqrt(v / b2c) + self.eps)
            if self.weight_decay:
                update = update + self.weight_decay * p.data
            p.data = p.data - np.asarray(lr, dtype=p.dtype) * update
            shadow *= self.ema_decay
            shadow += (1.0 - self.ema_decay) * p.data
        return norm

    def ema_state_dict(self) -> dict[str, np.ndarray]:
        return {name: shadow.copy() for name, shadow in zip(self.names, self.ema)}
