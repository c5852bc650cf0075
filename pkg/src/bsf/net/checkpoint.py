"""Portable network checkpoints.

A checkpoint is a single JSON document: layer specs plus each parameter
array as base64 of its little-endian float64 bytes. Round-trips are
bit-exact and the file is platform independent.
"""

import base64
import json

import numpy as np

from ..exceptions import DataError
from ..gating import BsfGate
from .layers import Conv1d, Dense, Flatten, Relu
from .network import Network

FORMAT = "bsf-checkpoint"
FORMAT_VERSION = 1

_REGISTRY = {
    "dense": Dense,
    "relu": Relu,
    "flatten": Flatten,
    "conv1d": Conv1d,
    "bsf": BsfGate,
}


def _encode(arr: np.ndarray) -> dict:
    return {
        "shape": list(arr.shape),
        "data": base64.b64encode(np.ascontiguousarray(arr, dtype="<f8").tobytes()).decode(),
    }


def _decode(entry: dict) -> np.ndarray:
    raw = base64.b64decode(entry["data"])
    flat = np.frombuffer(raw, dtype="<f8").astype(np.float64)
    shape = tuple(int(s) for s in entry["shape"])
    expected = 1
    for s in shape:
        expected *= s
    if flat.size != expected:
        raise DataError(
            f"parameter payload holds {flat.size} values but shape {shape} "
            f"needs {expected}"
        )
    return np.ascontiguousarray(flat.reshape(shape))


def dump_network(net: Network) -> str:
    doc = {
        "format": FORMAT,
        "format_version": FORMAT_VERSION,
        "input_shape": list(net.input_shape),
        "layers": [layer.spec() for layer in net.layers],
        "params": [
            {name: _encode(arr) for name, arr in layer.params().items()}
            for layer in net.layers
        ],
    }
    return json.dumps(doc, sort_keys=True)


def parse_network(text: str) -> Network:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DataError(f"checkpoint is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("format") != FORMAT:
        raise DataError("not a network checkpoint")
    if doc.get("format_version") != FORMAT_VERSION:
        raise DataError(f"unsupported checkpoint version {doc.get('format_version')!r}")
    try:
        layers = []
        for spec in doc["layers"]:
            kind = spec.get("kind")
            if kind not in _REGISTRY:
                raise DataError(f"unknown layer kind {kind!r}")
            layers.append(_REGISTRY[kind].from_spec(spec))
        net = Network(tuple(doc["input_shape"]), layers)
        for layer, saved in zip(net.layers, doc["params"]):
            params = layer.params()
            if set(saved) != set(params):
                raise DataError("checkpoint parameters do not match layer kinds")
            for name, entry in saved.items():
                arr = _decode(entry)
                if arr.shape != params[name].shape:
                    raise DataError(f"parameter {name} has shape {arr.shape}, "
                                    f"expected {params[name].shape}")
                params[name][...] = arr
    except DataError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"malformed checkpoint: {exc}") from exc
    net._initialized = True
    return net


def save_network(net: Network, path: str):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dump_network(net))
        fh.write("\n")


def load_network(path: str) -> Network:
    with open(path, encoding="utf-8") as fh:
        return parse_network(fh.read())
