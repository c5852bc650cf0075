"""Layer-stack network: shape-validated wiring, forward traces, backprop."""

import copy
from dataclasses import dataclass

import numpy as np

from ..core import RngStream, as_tensor, assert_finite
from ..exceptions import ShapeError, StateError
from ..gating import BsfGate

_INIT_DOMAIN = 0x1A17


@dataclass
class Trace:
    """Everything one training/inference forward produced, for backprop."""

    net_id: int
    train: bool
    outputs: list
    caches: list

    @property
    def output(self) -> np.ndarray:
        return self.outputs[-1]


class Network:
    """An ordered stack of layers over a declared input feature shape.

    Wiring is validated at construction: each layer's expected input shape
    must match the previous layer's output shape.
    """

    def __init__(self, input_shape: tuple | int, layers: list):
        if isinstance(input_shape, int):
            input_shape = (input_shape,)
        self.input_shape = tuple(int(s) for s in input_shape)
        self.layers = list(layers)
        self.grads: list[dict] | None = None
        self._initialized = False
        shape = self.input_shape
        self.shapes = [shape]
        for layer in self.layers:
            shape = layer.out_shape(shape)
            self.shapes.append(shape)

    @property
    def output_shape(self) -> tuple:
        return self.shapes[-1]

    def gates(self) -> list[tuple[int, BsfGate]]:
        return [(i, l) for i, l in enumerate(self.layers) if isinstance(l, BsfGate)]

    def initialize(self, rng: RngStream, force: bool = False) -> "Network":
        """He-uniform init of weighted layers; child streams are allocated in
        the order of layers that actually draw randomness, so inserting a
        gate (which draws none) leaves neighbouring layers' weights unchanged."""
        if self._initialized and not force:
            return self
        counter = 0
        root = rng.child(_INIT_DOMAIN)
        for layer in self.layers:
            if layer.needs_init():
                layer.init_params(root.child(counter))
                counter += 1
        self._initialized = True
        return self

    def forward(self, x, train: bool = False, rng: RngStream | None = None) -> Trace:
        x = as_tensor(x)
        if x.shape[1:] != self.input_shape:
            raise ShapeError(
                f"network expects feature shape {self.input_shape}, got {x.shape[1:]}"
            )
        outputs, caches = [], []
        for layer in self.layers:
            x, cache = layer.forward(x, train, rng)
            outputs.append(x)
            caches.append(cache)
        return Trace(net_id=id(self), train=train, outputs=outputs, caches=caches)

    def backward(self, trace: Trace, loss_grad: np.ndarray) -> list[dict]:
        """Backpropagate a loss gradient through a training-mode trace.

        Fills and returns per-layer gradient dicts; gate layers additionally
        receive their L1 penalty subgradient."""
        if trace.net_id != id(self):
            raise StateError("trace was produced by a different network")
        if not trace.train:
            raise StateError("backward needs a training-mode trace")
        upstream = as_tensor(loss_grad)
        if upstream.shape != trace.output.shape:
            raise ShapeError(
                f"loss gradient shape {upstream.shape} != output shape {trace.output.shape}"
            )
        grads: list[dict] = [None] * len(self.layers)
        for i in range(len(self.layers) - 1, -1, -1):
            upstream, g = self.layers[i].backward(trace.caches[i], upstream)
            if isinstance(self.layers[i], BsfGate):
                g["p"] = g["p"] + self.layers[i].l1_penalty()[1]
            grads[i] = g
        self.grads = grads
        return grads

    def predict(self, x) -> np.ndarray:
        """Deterministic inference forward (thresholded gates, no randomness)."""
        return self.forward(x, train=False).output

    def penalty_value(self) -> float:
        return sum(gate.l1_penalty()[0] for _, gate in self.gates())

    def constrain(self):
        for layer in self.layers:
            layer.constrain()

    def named_parameters(self, trainable_only: bool = True) -> list[tuple[str, np.ndarray]]:
        out = []
        for i, layer in enumerate(self.layers):
            source = layer.trainable_params() if trainable_only else layer.params()
            for name, arr in source.items():
                out.append((f"{i}.{name}", arr))
        return out

    def parameter_count(self, include_gates: bool = False) -> int:
        """Weight/bias element count; gate probability vectors are bookkeeping,
        not model weights, and are excluded unless asked for."""
        total = 0
        for layer in self.layers:
            if isinstance(layer, BsfGate) and not include_gates:
                continue
            total += sum(arr.size for arr in layer.params().values())
        return total

    def snapshot(self) -> list[dict]:
        return [{k: v.copy() for k, v in layer.params().items()} for layer in self.layers]

    def restore(self, snapshot: list[dict]):
        for layer, saved in zip(self.layers, snapshot):
            for k, v in saved.items():
                layer.params()[k][...] = v

    def clone(self) -> "Network":
        return copy.deepcopy(self)

    def check_finite(self):
        for name, arr in self.named_parameters(trainable_only=False):
            assert_finite(arr, f"parameter {name}")
