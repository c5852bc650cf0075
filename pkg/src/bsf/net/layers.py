"""Network layers: dense, relu, flatten, 1-D convolution.

Layers implement a small duck-typed protocol used by Network:

    out_shape(in_shape) -> output feature shape (validates wiring)
    needs_init()        -> whether init_params should be called
    init_params(rng)    -> fill weights (He-uniform)
    params() / trainable_params() -> {name: ndarray}
    forward(x, train, rng) -> (y, cache)
    backward(cache, upstream) -> (grad_x, {name: grad})
    constrain()         -> post-optimizer-step projection (no-op here)
    spec()              -> serializable layer description

Forward passes of the parametric layers accumulate their contractions in a
fixed index order (a rank-1-update loop) rather than calling BLAS. BLAS
reassociates partial sums when the contraction length or the output width
changes, which breaks the structural-pruning guarantee that removing
exactly-zero units leaves every surviving output bit-identical. With a fixed
order, a dropped term contributes an exact +0.0 and every surviving output's
rounding chain is unchanged. Backward passes use BLAS freely: gradients are
held to finite-difference accuracy, not bitwise equality.

Positions that are exactly zero across the whole batch are skipped in the
accumulation — exact for the same reason, and it makes heavily-gated
networks cheaper rather than dearer.
"""

import math

import numpy as np

from ..core import DTYPE, RngStream, as_tensor
from ..exceptions import ShapeError


def _strict_affine(x: np.ndarray, w: np.ndarray, b: np.ndarray) -> np.ndarray:
    """b + x @ w accumulated strictly in ascending input-index order."""
    n = x.shape[0]
    y = np.broadcast_to(b, (n, w.shape[1])).copy()
    tmp = np.empty_like(y)
    live = np.flatnonzero(np.any(x != 0.0, axis=0))
    for j in live:
        np.multiply(x[:, j : j + 1], w[j], out=tmp)
        np.add(y, tmp, out=y)
    return y


def _he_uniform(rng: RngStream, fan_in: int, shape: tuple) -> np.ndarray:
    bound = math.sqrt(6.0 / fan_in)
    return rng.generator().uniform(-bound, bound, size=shape).astype(DTYPE)


class Dense:
    """Affine map on 1-D feature vectors: y = x @ w + b."""

    def __init__(self, n_in: int, n_out: int):
        if n_in < 1 or n_out < 1:
            raise ShapeError("dense layer needs positive dimensions")
        self.n_in = n_in
        self.n_out = n_out
        self.w = np.zeros((n_in, n_out), dtype=DTYPE)
        self.b = np.zeros(n_out, dtype=DTYPE)

    def out_shape(self, in_shape):
        if len(in_shape) != 1 or in_shape[0] != self.n_in:
            raise ShapeError(f"dense expects ({self.n_in},) features, got {tuple(in_shape)}")
        return (self.n_out,)

    def needs_init(self):
        return True

    def init_params(self, rng: RngStream):
        self.w = _he_uniform(rng, self.n_in, (self.n_in, self.n_out))
        self.b = np.zeros(self.n_out, dtype=DTYPE)

    def params(self):
        return {"w": self.w, "b": self.b}

    trainable_params = params

    def forward(self, x, train, rng):
        x = as_tensor(x)
        if x.ndim != 2 or x.shape[1] != self.n_in:
            raise ShapeError(f"dense expects (batch, {self.n_in}), got {x.shape}")
        return _strict_affine(x, self.w, self.b), x

    def backward(self, cache, upstream):
        x = cache
        grad_w = x.T @ upstream
        grad_b = upstream.sum(axis=0)
        grad_x = upstream @ self.w.T
        return grad_x, {"w": grad_w, "b": grad_b}

    def constrain(self):
        pass

    def spec(self):
        return {"kind": "dense", "n_in": self.n_in, "n_out": self.n_out}

    @classmethod
    def from_spec(cls, spec):
        return cls(spec["n_in"], spec["n_out"])


class Relu:
    def out_shape(self, in_shape):
        return tuple(in_shape)

    def needs_init(self):
        return False

    def params(self):
        return {}

    trainable_params = params

    def forward(self, x, train, rng):
        x = as_tensor(x)
        return np.maximum(x, 0.0), x > 0.0

    def backward(self, cache, upstream):
        return upstream * cache, {}

    def constrain(self):
        pass

    def spec(self):
        return {"kind": "relu"}

    @classmethod
    def from_spec(cls, spec):
        return cls()


class Flatten:
    def out_shape(self, in_shape):
        size = 1
        for s in in_shape:
            size *= s
        return (size,)

    def needs_init(self):
        return False

    def params(self):
        return {}

    trainable_params = params

    def forward(self, x, train, rng):
        x = as_tensor(x)
        return x.reshape(x.shape[0], -1), x.shape

    def backward(self, cache, upstream):
        return upstream.reshape(cache), {}

    def constrain(self):
        pass

    def spec(self):
        return {"kind": "flatten"}

    @classmethod
    def from_spec(cls, spec):
        return cls()


class Conv1d:
    """1-D convolution over (batch, length, channels), zero-padded "same".

    Output length is ceil(length / stride); padding splits the deficit with
    the extra zero on the right.
    """

    def __init__(self, c_in: int, c_out: int, width: int, stride: int = 1):
        if min(c_in, c_out, width, stride) < 1:
            raise ShapeError("conv1d needs positive dimensions")
        self.c_in = c_in
        self.c_out = c_out
        self.width = width
        self.stride = stride
        self.k = np.zeros((width, c_in, c_out), dtype=DTYPE)
        self.b = np.zeros(c_out, dtype=DTYPE)

    def out_shape(self, in_shape):
        if len(in_shape) != 2 or in_shape[1] != self.c_in:
            raise ShapeError(
                f"conv1d expects (length, {self.c_in}) features, got {tuple(in_shape)}"
            )
        return (-(-in_shape[0] // self.stride), self.c_out)

    def needs_init(self):
        return True

    def init_params(self, rng: RngStream):
        fan_in = self.width * self.c_in
        self.k = _he_uniform(rng, fan_in, (self.width, self.c_in, self.c_out))
        self.b = np.zeros(self.c_out, dtype=DTYPE)

    def params(self):
        return {"k": self.k, "b": self.b}

    trainable_params = params

    def _pad(self, length: int) -> tuple[int, int, int]:
        out_len = -(-length // self.stride)
        deficit = max((out_len - 1) * self.stride + self.width - length, 0)
        return out_len, deficit // 2, deficit - deficit // 2

    def forward(self, x, train, rng):
        x = as_tensor(x)
        if x.ndim != 3 or x.shape[2] != self.c_in:
            raise ShapeError(f"conv1d expects (batch, length, {self.c_in}), got {x.shape}")
        n, length, _ = x.shape
        out_len, left, right = self._pad(length)
        xp = np.pad(x, ((0, 0), (left, right), (0, 0)))
        span = (out_len - 1) * self.stride + 1
        y = np.broadcast_to(self.b, (n, out_len, self.c_out)).copy()
        tmp = np.empty_like(y)
        for dw in range(self.width):
            tap = xp[:, dw : dw + span : self.stride, :]
            for ci in range(self.c_in):
                col = tap[:, :, ci]
                if not col.any():
                    continue
                np.multiply(col[:, :, None], self.k[dw, ci], out=tmp)
                np.add(y, tmp, out=y)
        return y, (xp, length, out_len)

    def backward(self, cache, upstream):
        xp, length, out_len = cache
        n = xp.shape[0]
        span = (out_len - 1) * self.stride + 1
        grad_b = upstream.sum(axis=(0, 1))
        grad_k = np.zeros_like(self.k)
        grad_xp = np.zeros_like(xp)
        up2 = upstream.reshape(n * out_len, self.c_out)
        for dw in range(self.width):
            tap = xp[:, dw : dw + span : self.stride, :].reshape(n * out_len, self.c_in)
            grad_k[dw] = tap.T @ up2
            grad_xp[:, dw : dw + span : self.stride, :] += (up2 @ self.k[dw].T).reshape(
                n, out_len, self.c_in
            )
        left = self._pad(length)[1]
        return grad_xp[:, left : left + length, :], {"k": grad_k, "b": grad_b}

    def constrain(self):
        pass

    def spec(self):
        return {
            "kind": "conv1d",
            "c_in": self.c_in,
            "c_out": self.c_out,
            "width": self.width,
            "stride": self.stride,
        }

    @classmethod
    def from_spec(cls, spec):
        return cls(spec["c_in"], spec["c_out"], spec["width"], spec.get("stride", 1))
