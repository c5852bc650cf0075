"""Binary stochastic gating layer.

Each gate g holds a probability p[g]. In training mode the layer draws a
0/1 mask r ~ Bernoulli(p) and multiplies activations by it elementwise; in
inference mode it applies the deterministic mask p > tau (strict, so a gate
sitting exactly on the threshold drops) with no rescaling of survivors.

Gradients: activations receive the sampled mask (d out / d x = r); gate
probabilities receive the expected-value derivative d E[out] / d p = x,
optionally damped by p itself (``scaled_grad``) so that nearly-closed gates
take proportionally smaller updates. An L1 penalty on p, with subgradient
penalty * sign(p), pressures gates toward zero; the training loop adds that
term after backprop.

A group map lets several tensor positions share one gate (e.g. one gate per
conv channel, or one gate per spatial position shared across channels).
"""

from dataclasses import dataclass, field

import numpy as np

from .core import DTYPE, RngStream, as_tensor, bernoulli_sample
from .exceptions import DomainError, ShapeError, StateError


def identity_groups(n: int) -> np.ndarray:
    """One gate per position of a length-n feature vector."""
    return np.arange(n, dtype=np.int64)


def channel_groups(length: int, channels: int) -> np.ndarray:
    """One gate per channel of an (length, channels) block, shared along positions."""
    return np.tile(np.arange(channels, dtype=np.int64), (length, 1))


def position_groups(length: int, channels: int) -> np.ndarray:
    """One gate per spatial position of an (length, channels) block, shared across channels."""
    return np.repeat(np.arange(length, dtype=np.int64)[:, None], channels, axis=1)


@dataclass
class BsfGate:
    """Stochastic gating layer over a fixed feature-block shape.

    Parameters are the gate probabilities ``p`` (initialised to 1: start from
    the full model and let the penalty carve it down). ``groups`` is an
    integer array with the feature-block shape mapping every position to its
    gate; by default each position owns its own gate.
    """

    n_gates: int | None = None
    groups: np.ndarray | None = None
    tau: float = 0.25
    penalty: float = 0.0
    scaled_grad: bool = True
    per_sample: bool = False
    trainable: bool = True
    p: np.ndarray = field(init=False)

    def __post_init__(self):
        if self.groups is None:
            if self.n_gates is None:
                raise ShapeError("BsfGate needs n_gates or an explicit group map")
            self.groups = identity_groups(self.n_gates)
        self.groups = np.asarray(self.groups, dtype=np.int64)
        n = int(self.groups.max()) + 1 if self.groups.size else 0
        if self.n_gates is None:
            self.n_gates = n
        if self.groups.size == 0 or self.groups.min() < 0 or n > self.n_gates:
            raise ShapeError("group map entries must lie in [0, n_gates)")
        present = np.bincount(self.groups.reshape(-1), minlength=self.n_gates)
        if np.any(present == 0):
            raise ShapeError("every gate must own at least one position")
        if not 0.0 <= self.tau < 1.0:
            raise DomainError("tau must lie in [0, 1)")
        if self.penalty < 0.0:
            raise DomainError("penalty must be non-negative")
        self.p = np.ones(self.n_gates, dtype=DTYPE)

    # --- layer protocol ---------------------------------------------------

    def out_shape(self, in_shape: tuple) -> tuple:
        if tuple(in_shape) != self.groups.shape:
            raise ShapeError(
                f"gate expects feature shape {self.groups.shape}, got {tuple(in_shape)}"
            )
        return tuple(in_shape)

    def needs_init(self) -> bool:
        return False

    def params(self) -> dict:
        return {"p": self.p}

    def trainable_params(self) -> dict:
        return {"p": self.p} if self.trainable else {}

    def _check_p(self):
        if np.any(self.p < 0.0) or np.any(self.p > 1.0):
            raise DomainError("gate probabilities left [0, 1]")

    def _expand(self, mask: np.ndarray, batch: int) -> np.ndarray:
        """Broadcast per-gate values onto the feature block (batch leading)."""
        if mask.ndim == 1:
            return mask[self.groups]
        flat = mask[:, self.groups.reshape(-1)]
        return flat.reshape((batch,) + self.groups.shape)

    def forward(self, x: np.ndarray, train: bool, rng: RngStream | None):
        self._check_p()
        x = as_tensor(x)
        if x.shape[1:] != self.groups.shape:
            raise ShapeError(
                f"gate expects feature shape {self.groups.shape}, got {x.shape[1:]}"
            )
        if not train:
            keep = (self.p > self.tau).astype(DTYPE)
            return x * self._expand(keep, x.shape[0]), (x, None)
        if rng is None:
            raise StateError("training-mode gating needs an rng stream")
        mask = bernoulli_sample(self.p, rng, n=x.shape[0] if self.per_sample else None)
        y = x * self._expand(mask, x.shape[0])
        return y, (x, mask)

    def backward(self, cache, upstream: np.ndarray):
        x, mask = cache
        if mask is None:
            raise StateError("no sampled mask: backward needs a training-mode trace")
        grad_x = upstream * self._expand(mask, x.shape[0])
        per_position = (upstream * x).sum(axis=0)
        grad_p = np.bincount(
            self.groups.reshape(-1),
            weights=per_position.reshape(-1),
            minlength=self.n_gates,
        )
        if self.scaled_grad:
            grad_p = grad_p * self.p
        return grad_x, {"p": grad_p}

    def constrain(self):
        np.clip(self.p, 0.0, 1.0, out=self.p)

    # --- selection & penalty ----------------------------------------------

    def l1_penalty(self) -> tuple[float, np.ndarray]:
        """Penalty value penalty*sum|p| and its subgradient penalty*sign(p)."""
        return self.penalty * float(np.abs(self.p).sum()), self.penalty * np.sign(self.p)

    def selected_indices(self) -> list[int]:
        """Gates strictly above threshold, ascending."""
        return [int(i) for i in np.flatnonzero(self.p > self.tau)]

    # --- serialization ----------------------------------------------------

    def spec(self) -> dict:
        return {
            "kind": "bsf",
            "n_gates": int(self.n_gates),
            "groups": self.groups.tolist(),
            "tau": self.tau,
            "penalty": self.penalty,
            "scaled_grad": self.scaled_grad,
            "per_sample": self.per_sample,
            "trainable": self.trainable,
        }

    @classmethod
    def from_spec(cls, spec: dict) -> "BsfGate":
        return cls(
            n_gates=spec["n_gates"],
            groups=np.asarray(spec["groups"], dtype=np.int64),
            tau=spec["tau"],
            penalty=spec["penalty"],
            scaled_grad=spec["scaled_grad"],
            per_sample=spec.get("per_sample", False),
            trainable=spec.get("trainable", True),
        )
