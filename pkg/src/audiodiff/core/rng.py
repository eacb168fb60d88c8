"""Counter-based deterministic random number generator.

The generator is SplitMix64 run in counter mode: draw ``i`` of a stream is
``mix64(key + (i + 1) * GAMMA)`` where ``mix64`` is the SplitMix64 finalizer.
Every draw is a pure function of (key, counter), so sequences are identical
across runs, platforms and worker layouts.  Independent streams are derived
by hashing a label into the parent key, which gives the explicit per-stream
keys (data, dropout, noise, per-sample indices) the rest of the system uses.
"""

from __future__ import annotations

import numpy as np

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_FNV_OFFSET = np.uint64(0xCBF29CE484222325)
_FNV_PRIME = np.uint64(0x100000001B3)

_TWO53 = float(1 << 53)


def _mix64(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def _hash_label(label) -> np.uint64:
    # FNV-1a over the utf-8 repr; stable across runs, unlike hash().
    if isinstance(label, tuple):
        h = _FNV_OFFSET
        for part in label:
            h = (h ^ _hash_label(part)) * _FNV_PRIME
        return h
    data = str(label).encode("utf-8")
    h = _FNV_OFFSET
    for b in data:
        h = (h ^ np.uint64(b)) * _FNV_PRIME
    return h


class Rng:
    """Deterministic multi-stream generator.

    ``algorithm`` names the construction; it is part of the reproducibility
    contract and recorded in checkpoints and manifests.
    """

    algorithm = "splitmix64-counter"

    def __init__(self, seed: int, _key: np.uint64 | None = None):
        self.seed = int(seed)
        with np.errstate(over="ignore"):
            self._key = (
                _mix64(np.uint64(seed & 0xFFFFFFFFFFFFFFFF)) if _key is None else _key
            )
        self._counter = 0

    def stream(self, label) -> "Rng":
        """Derive an independent child stream keyed by a stable label."""
        with np.errstate(over="ignore"):
            key = _mix64(_mix64(self._key ^ _hash_label(label)) + _GAMMA)
        child = Rng(self.seed, _key=key)
        return child

    def _raw(self, n: int) -> np.ndarray:
        with np.errstate(over="ignore"):
            idx = np.arange(self._counter + 1, self._counter + n + 1, dtype=np.uint64)
            out = _mix64(self._key + idx * _GAMMA)
        self._counter += n
        return out

    def uniform(self, shape=(), dtype=np.float64) -> np.ndarray:
        """Uniform draws in [0, 1) with 53-bit resolution."""
        shape = (shape,) if isinstance(shape, int) else tuple(shape)
        n = int(np.prod(shape)) if shape else 1
        u = (self._raw(n) >> np.uint64(11)).astype(np.float64) / _TWO53
        u = u.astype(dtype, copy=False)
        return u.reshape(shape) if shape else dtype(u[0])

    def normal(self, shape=(), dtype=np.float64) -> np.ndarray:
        """Standard normal draws via Box-Muller (deterministic, no rejection)."""
        shape = (shape,) if isinstance(shape, int) else tuple(shape)
        n = int(np.prod(shape)) if shape else 1
        m = (n + 1) // 2
        u1 = 1.0 - (self._raw(m) >> np.uint64(11)).astype(np.float64) / _TWO53
        u2 = (self._raw(m) >> np.uint64(11)).astype(np.float64) / _TWO53
        r = np.sqrt(-2.0 * np.log(u1))
        theta = 2.0 * np.pi * u2
        z = np.concatenate([r * np.cos(theta), r * np.sin(theta)])[:n]
        z = z.astype(dtype, copy=False)
        return z.reshape(shape) if shape else dtype(z[0])

    def integers(self, low: int, high: int, shape=()) -> np.ndarray:
        """Integers in [low, high). Uses the uniform path; the tiny modulo
        bias is irrelevant next to the determinism requirement."""
        shape = (shape,) if isinstance(shape, int) else tuple(shape)
        u = self.uniform(shape if shape else (1,))
        out = (low + np.floor(u * (high - low))).astype(np.int64)
        out = np.minimum(out, high - 1)
        return out.reshape(shape) if shape else int(out[0])

    def permutation(self, n: int) -> np.ndarray:
        # Stable argsort of uniform keys; ties are broken by index order.
        keys = self._raw(n)
        return np.argsort(keys, kind="stable")

    def choice(self, n: int, size: int) -> np.ndarray:
        return self.permutation(n)[:size]
