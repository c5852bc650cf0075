"""Structural pruning: turn thresholded gates into genuinely smaller layers.

A gate whose probability is at or below its threshold zeroes its positions
at inference time; pruning deletes those positions from the surrounding
weight arrays instead and removes the gate layers entirely. Because the
removed positions contribute exactly zero to every downstream accumulation
(and layer forwards accumulate in a fixed order), the pruned network's
outputs are bit-identical to the gated network's inference outputs.

Supported gate sites:
  * at the input (identity-style gates over features): the following dense
    layer loses input rows; the pruned network then consumes only the kept
    feature columns,
  * between dense layers (relu allowed in between): the preceding dense
    loses output units and bias entries, the following dense loses the
    matching input rows,
  * after a conv layer with channel-aligned gates (relu allowed in between):
    the conv loses output channels and the next conv loses the matching
    input channels — or, across a flatten, the next dense loses the columns
    of the removed channels.

Anything else (e.g. position-shared gates over a conv output) has no
structural counterpart and raises a structure error.
"""

from dataclasses import dataclass, field

import numpy as np

from .exceptions import DegenerateModelError, StructureError
from .gating import BsfGate
from .net.layers import Conv1d, Dense, Flatten, Relu
from .net.network import Network


@dataclass
class GatePruneInfo:
    layer_index: int
    site: str
    kept: int
    total: int
    kept_gates: list[int]

    def to_dict(self) -> dict:
        return {
            "layer_index": self.layer_index,
            "site": self.site,
            "kept": self.kept,
            "total": self.total,
            "kept_gates": self.kept_gates,
        }


@dataclass
class PruneReport:
    gates: list[GatePruneInfo] = field(default_factory=list)
    original_parameters: int = 0
    pruned_parameters: int = 0
    input_kept: list[int] | None = None

    @property
    def weights_kept_fraction(self) -> float:
        if self.original_parameters == 0:
            return 1.0
        return self.pruned_parameters / self.original_parameters

    def to_dict(self) -> dict:
        return {
            "gates": [g.to_dict() for g in self.gates],
            "original_parameters": self.original_parameters,
            "pruned_parameters": self.pruned_parameters,
            "weights_kept_fraction": self.weights_kept_fraction,
            "input_kept": self.input_kept,
        }


def normalized_penalties(net: Network, base_penalty: float) -> list[float]:
    """Per-gate penalty base/n_gates, so wide layers are not favoured merely
    for having more gates to pay for."""
    if base_penalty < 0:
        raise StructureError("base penalty must be non-negative")
    return [base_penalty / gate.n_gates for _, gate in net.gates()]


def _prev_parametric(layers: list, index: int):
    for j in range(index - 1, -1, -1):
        layer = layers[j]
        if isinstance(layer, Relu):
            continue
        if isinstance(layer, (Dense, Conv1d)):
            return j
        raise StructureError(
            f"gate at layer {index} follows unsupported layer "
            f"{type(layer).__name__} at {j}"
        )
    return None


def _next_parametric(layers: list, index: int, allow_flatten: bool):
    for j in range(index + 1, len(layers)):
        layer = layers[j]
        if isinstance(layer, Relu):
            continue
        if isinstance(layer, Flatten) and allow_flatten:
            allow_flatten = False
            continue
        if isinstance(layer, (Dense, Conv1d)):
            return j
        raise StructureError(
            f"gate at layer {index} precedes unsupported layer "
            f"{type(layer).__name__} at {j}"
        )
    raise StructureError(f"gate at layer {index} has no following weighted layer")


def prune(net: Network) -> tuple[Network, PruneReport]:
    """Build a smaller network with every thresholded gate folded away."""
    clone = net.clone()
    layers = clone.layers
    report = PruneReport(original_parameters=net.parameter_count())
    input_shape = clone.input_shape

    for index, gate in clone.gates():
        survivors = gate.p > gate.tau
        kept = int(survivors.sum())
        if kept == 0:
            raise DegenerateModelError(
                f"gate at layer {index} keeps no units (all p <= {gate.tau})"
            )
        position_keep = survivors[gate.groups]
        prev_j = _prev_parametric(layers, index)
        prev = None if prev_j is None else layers[prev_j]

        if prev is None or isinstance(prev, Dense):
            if position_keep.ndim != 1:
                raise StructureError(
                    "gates over multi-axis features can only be pruned after conv layers"
                )
            next_j = _next_parametric(layers, index, allow_flatten=False)
            nxt = layers[next_j]
            if not isinstance(nxt, Dense):
                raise StructureError(
                    "a feature/unit gate must feed a dense layer to be prunable"
                )
            if prev is None:
                kept_idx = np.flatnonzero(position_keep)
                report.input_kept = [int(i) for i in kept_idx]
                input_shape = (int(position_keep.sum()),)
                site = "input"
            else:
                prev.w = np.ascontiguousarray(prev.w[:, position_keep])
                prev.b = np.ascontiguousarray(prev.b[position_keep])
                prev.n_out = int(position_keep.sum())
                site = "dense-units"
            nxt.w = np.ascontiguousarray(nxt.w[position_keep])
            nxt.n_in = int(position_keep.sum())
        elif isinstance(prev, Conv1d):
            if position_keep.ndim != 2 or not np.all(position_keep == position_keep[:1, :]):
                raise StructureError(
                    "only channel-aligned gates are prunable after conv layers"
                )
            channel_keep = position_keep[0]
            prev.k = np.ascontiguousarray(prev.k[:, :, channel_keep])
            prev.b = np.ascontiguousarray(prev.b[channel_keep])
            prev.c_out = int(channel_keep.sum())
            next_j = _next_parametric(layers, index, allow_flatten=True)
            nxt = layers[next_j]
            if isinstance(nxt, Conv1d):
                nxt.k = np.ascontiguousarray(nxt.k[:, channel_keep, :])
                nxt.c_in = int(channel_keep.sum())
            else:
                flat_keep = position_keep.reshape(-1)
                nxt.w = np.ascontiguousarray(nxt.w[flat_keep])
                nxt.n_in = int(flat_keep.sum())
            site = "conv-channels"
        else:  # pragma: no cover - _prev_parametric already rejects others
            raise StructureError(f"unsupported layer before gate: {type(prev).__name__}")

        report.gates.append(
            GatePruneInfo(
                layer_index=index,
                site=site,
                kept=kept,
                total=int(gate.n_gates),
                kept_gates=[int(i) for i in np.flatnonzero(survivors)],
            )
        )

    remaining = [layer for layer in layers if not isinstance(layer, BsfGate)]
    pruned = Network(input_shape, remaining)
    pruned._initialized = True
    report.pruned_parameters = pruned.parameter_count()
    return pruned, report
