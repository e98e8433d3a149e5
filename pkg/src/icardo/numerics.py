"""Seeded randomness, ordering and small numeric helpers.

The generator is SplitMix64 (Steele, Lea & Flood 2014). It is pinned: every
seeded operation in the package draws from it, so a seed reproduces the same
split, forest and network initialisation on any platform.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .errors import NumericalError

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15


def fmix64(z: int) -> int:
    """SplitMix64 output finaliser."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def mix_seed(parent: int, index: int) -> int:
    """Derive an independent child seed: ``fmix64(parent + (index + 1) * GAMMA)``."""
    return fmix64((parent + (index + 1) * GAMMA) & MASK64)


def text_seed(text: str) -> int:
    """Stable 64-bit key for a string (FNV-1a over UTF-8, then fmix64)."""
    h = 0xCBF29CE484222325
    for b in text.encode("utf-8"):
        h = ((h ^ b) * 0x100000001B3) & MASK64
    return fmix64(h)


class Rng:
    """SplitMix64 generator. Single owner; derive children for workers."""

    def __init__(self, seed: int):
        self.seed = int(seed) & MASK64
        self.state = self.seed

    def next_u64(self) -> int:
        self.state = (self.state + GAMMA) & MASK64
        return fmix64(self.state)

    def random(self) -> float:
        """Uniform float in [0, 1) with 53 bits of precision."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def uniform(self, low: float, high: float, size: int | tuple[int, ...]) -> np.ndarray:
        shape = (size,) if isinstance(size, int) else tuple(size)
        n = int(np.prod(shape)) if shape else 1
        draws = np.array([self.random() for _ in range(n)], dtype=float)
        return (low + (high - low) * draws).reshape(shape)

    def integers(self, n: int) -> int:
        """Unbiased integer in [0, n) by rejection."""
        if n <= 0:
            raise ValueError("n must be positive")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            x = self.next_u64()
            if x < limit:
                return x % n

    def permutation(self, n: int) -> np.ndarray:
        """Fisher-Yates shuffle of ``range(n)``."""
        out = list(range(n))
        for i in range(n - 1, 0, -1):
            j = self.integers(i + 1)
            out[i], out[j] = out[j], out[i]
        return np.array(out, dtype=np.int64)

    def choice(self, n: int, size: int) -> np.ndarray:
        """``size`` draws from ``range(n)`` with replacement."""
        return np.array([self.integers(n) for _ in range(size)], dtype=np.int64)

    def child(self, index: int) -> "Rng":
        return Rng(mix_seed(self.seed, index))


def soft_threshold(z: float, lam: float) -> float:
    if lam < 0:
        raise ValueError("lambda must be non-negative")
    if z > lam:
        return z - lam
    if z < -lam:
        return z + lam
    return 0.0


def soft_threshold_array(z: np.ndarray, lam: float) -> np.ndarray:
    if lam < 0:
        raise ValueError("lambda must be non-negative")
    return np.sign(z) * np.maximum(np.abs(z) - lam, 0.0)


def stable_argsort_desc(values: Sequence[float] | np.ndarray) -> np.ndarray:
    """Indices by descending value; equal values keep ascending index order."""
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        return np.zeros(0, dtype=np.int64)
    if np.isnan(arr).any():
        raise ValueError("cannot rank NaN values")
    # negate so a stable ascending sort yields descending order with index tie-break
    return np.argsort(-arr, kind="stable").astype(np.int64)


def finite_diff_grad(f: Callable[[np.ndarray], float], x: np.ndarray, h: float = 1e-5) -> np.ndarray:
    """Central-difference gradient of a scalar function."""
    if h <= 0:
        raise ValueError("h must be positive")
    x = np.asarray(x, dtype=float)
    grad = np.empty_like(x)
    flat = grad.reshape(-1)
    for i in range(x.size):
        step = np.zeros(x.size)
        step[i] = h
        step = step.reshape(x.shape)
        hi = f(x + step)
        lo = f(x - step)
        if not (np.isfinite(hi) and np.isfinite(lo)):
            raise NumericalError(f"non-finite function value at coordinate {i}")
        flat[i] = (hi - lo) / (2.0 * h)
    return grad


def sigmoid(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out
