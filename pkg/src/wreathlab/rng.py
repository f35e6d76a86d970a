"""Counter-based random streams.

Every Monte Carlo quantity in the package is a pure function of
``(master seed, trial index, counter)``.  A trial's stream key is
``mix64(mix64(seed + GAMMA) + (trial + 1) * GAMMA)`` and its m-th 64-bit draw is
``mix64(key + (m + 1) * GAMMA)`` (SplitMix64).  Each draw is split into two
32-bit words, low half first.  Because nothing depends on how trials are
batched or which worker evaluates them, results do not change with the
thread count.
"""
from __future__ import annotations

import math

import numpy as np

GAMMA = 0x9E3779B97F4A7C15
MASK64 = (1 << 64) - 1

_G = np.uint64(GAMMA)
_C1 = np.uint64(0xBF58476D1CE4E5B9)
_C2 = np.uint64(0x94D049BB133111EB)
_S30, _S27, _S31, _S32 = (np.uint64(s) for s in (30, 27, 31, 32))
_LOW32 = np.uint64(0xFFFFFFFF)


def mix64(z: int) -> int:
    """SplitMix64 finalizer, a bijection of 64-bit integers."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def stream_key(seed: int, trial: int) -> int:
    return mix64(mix64(seed + GAMMA) + (trial + 1) * GAMMA)


def derive_seed(seed: int, label: str) -> int:
    """Independent master seed for a named sub-experiment."""
    h = 0
    for ch in label.encode():
        h = mix64(h ^ ch)
    return mix64(seed ^ h)


def _mix_array(z: np.ndarray) -> np.ndarray:
    z = z ^ (z >> _S30)
    z *= _C1
    z ^= z >> _S27
    z *= _C2
    z ^= z >> _S31
    return z


def stream_keys(seed: int, trials) -> np.ndarray:
    trials = np.asarray(trials, dtype=np.uint64)
    base = np.uint64(mix64(seed + GAMMA))
    with np.errstate(over="ignore"):
        return _mix_array(base + (trials + np.uint64(1)) * _G)


def draws(keys: np.ndarray, start: int, stop: int) -> np.ndarray:
    """64-bit draws ``start..stop-1`` for each key; shape (len(keys), stop-start)."""
    counters = np.arange(start + 1, stop + 1, dtype=np.uint64) * _G
    with np.errstate(over="ignore"):
        return _mix_array(keys[:, None] + counters[None, :])


def words32(keys: np.ndarray, start: int, stop: int) -> np.ndarray:
    """32-bit words ``start..stop-1`` (as uint64) for each key."""
    d0, d1 = start // 2, (stop + 1) // 2
    d = draws(keys, d0, d1)
    out = np.empty((len(keys), 2 * (d1 - d0)), dtype=np.uint64)
    out[:, 0::2] = d & _LOW32
    out[:, 1::2] = d >> _S32
    off = start - 2 * d0
    return out[:, off:off + (stop - start)]


def choices(keys: np.ndarray, start: int, stop: int, k: int) -> np.ndarray:
    """Uniform indices in ``range(k)`` from 32-bit words (multiply-shift)."""
    w = words32(keys, start, stop)
    c = (w * np.uint64(k)) >> _S32
    return c.astype(np.int32 if k > 127 else np.int8)


def uniforms(keys: np.ndarray, start: int, stop: int) -> np.ndarray:
    """Doubles in [0, 1) from 64-bit draws (top 53 bits)."""
    d = draws(keys, start, stop)
    return (d >> np.uint64(11)).astype(np.float64) * (1.0 / 9007199254740992.0)


def normals(keys: np.ndarray, start: int, count: int) -> np.ndarray:
    """Standard normals by Box-Muller; consumes draws ``start..start+2*ceil(count/2)-1``."""
    m = (count + 1) // 2
    u = uniforms(keys, start, start + 2 * m)
    u1 = 1.0 - u[:, 0::2]
    u2 = u[:, 1::2]
    r = np.sqrt(-2.0 * np.log(u1))
    z = np.empty((len(keys), 2 * m))
    z[:, 0::2] = r * np.cos(2 * math.pi * u2)
    z[:, 1::2] = r * np.sin(2 * math.pi * u2)
    return z[:, :count]


class TrialStream:
    """Scalar view of one trial's stream, for reference (non-vectorized) code."""

    def __init__(self, seed: int, trial: int):
        self.key = stream_key(seed, trial)
        self._m = 0
        self._pending = None

    def draw64(self) -> int:
        self._pending = None
        self._m += 1
        return mix64(self.key + self._m * GAMMA)

    def word32(self) -> int:
        if self._pending is not None:
            w, self._pending = self._pending, None
            return w
        d = self.draw64()
        self._pending = d >> 32
        return d & 0xFFFFFFFF

    def choice(self, k: int) -> int:
        return (self.word32() * k) >> 32
