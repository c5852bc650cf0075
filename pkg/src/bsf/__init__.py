"""Binary stochastic filtering: trainable Bernoulli gates for feature
selection, structural network pruning, and spectral region selection,
with a verification lab for the gated-regression expected objective."""

from . import gating, net, pipeline, pruning, reglab
from .core import RngStream, as_tensor, bernoulli_sample, derive_seed, matmul
from .exceptions import (
    BsfError,
    CapacityError,
    ConfigError,
    DataError,
    DegenerateModelError,
    DomainError,
    ShapeError,
    StateError,
    StructureError,
    TrainingDivergedError,
)
from .gating import BsfGate, channel_groups, identity_groups, position_groups

__version__ = "0.1.0"

__all__ = [
    "BsfError",
    "BsfGate",
    "CapacityError",
    "ConfigError",
    "DataError",
    "DegenerateModelError",
    "DomainError",
    "RngStream",
    "ShapeError",
    "StateError",
    "StructureError",
    "TrainingDivergedError",
    "as_tensor",
    "bernoulli_sample",
    "channel_groups",
    "derive_seed",
    "gating",
    "identity_groups",
    "matmul",
    "net",
    "pipeline",
    "position_groups",
    "pruning",
    "reglab",
]
