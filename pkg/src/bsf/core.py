"""Numeric substrate: float64 tensors, splittable RNG streams, validated ops.

All arrays in the package are C-contiguous float64 ndarrays produced through
:func:`as_tensor`. Randomness flows through :class:`RngStream`, a counter-based
Philox generator keyed by a 128-bit (seed, stream) pair, so any draw is
bit-reproducible across runs and platforms and independent streams can be
derived without coordination.
"""

from dataclasses import dataclass, field

import numpy as np

from .exceptions import DomainError, ShapeError

DTYPE = np.float64

_M64 = (1 << 64) - 1


def _splitmix64(z: int) -> int:
    """One splitmix64 scramble step; bijective on 64-bit ints."""
    z = (z + 0x9E3779B97F4A7C15) & _M64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _M64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _M64
    return z ^ (z >> 31)


def derive_seed(*parts: int) -> int:
    """Fold integer parts into one well-mixed 64-bit seed (order-sensitive)."""
    acc = 0x243F6A8885A308D3
    for part in parts:
        acc = _splitmix64(acc ^ _splitmix64(part & _M64))
    return acc


def as_tensor(values) -> np.ndarray:
    """Coerce to a C-contiguous float64 array."""
    return np.ascontiguousarray(values, dtype=DTYPE)


def assert_finite(arr: np.ndarray, what: str = "array") -> np.ndarray:
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{what} contains non-finite values")
    return arr


@dataclass
class RngStream:
    """A named, splittable source of randomness.

    Two streams with the same (seed, stream) key yield identical draw
    sequences; differing keys yield statistically independent ones. The
    underlying generator is created lazily and advances as it is consumed,
    so a stream object is single-owner mutable state.
    """

    seed: int
    stream: int = 0
    _gen: np.random.Generator | None = field(default=None, repr=False, compare=False)

    def generator(self) -> np.random.Generator:
        if self._gen is None:
            key = np.array([self.seed & _M64, self.stream & _M64], dtype=np.uint64)
            self._gen = np.random.Generator(np.random.Philox(key=key))
        return self._gen

    def child(self, tag: int) -> "RngStream":
        """Derive an independent stream; same (seed, stream, tag) -> same child."""
        return RngStream(self.seed, _splitmix64(self.stream ^ _splitmix64(tag)))


def bernoulli_sample(p: np.ndarray, rng: RngStream, n: int | None = None) -> np.ndarray:
    """Draw 0/1 floats with per-entry success probability ``p``.

    Returns an array of shape ``p.shape``, or ``(n,) + p.shape`` when ``n``
    is given (n independent rows). Advances ``rng``.
    """
    p = as_tensor(p)
    if np.any(p < 0.0) or np.any(p > 1.0):
        raise DomainError("bernoulli probabilities must lie in [0, 1]")
    shape = p.shape if n is None else (n,) + p.shape
    u = rng.generator().random(shape)
    return (u < p).astype(DTYPE)


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Validated 2-D matrix product (no implicit broadcasting)."""
    a = as_tensor(a)
    b = as_tensor(b)
    if a.ndim != 2 or b.ndim != 2:
        raise ShapeError(f"matmul expects 2-D operands, got {a.ndim}-D and {b.ndim}-D")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"inner dimensions differ: {a.shape} @ {b.shape}")
    return a @ b
