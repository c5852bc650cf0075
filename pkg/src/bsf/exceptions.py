"""Error taxonomy shared across the package.

Every public operation raises one of these instead of leaking bare
numpy/python errors, so callers (and the service layer) can map failures
uniformly.
"""


class BsfError(Exception):
    """Base class for all package errors."""


class ShapeError(BsfError, ValueError):
    """Array shapes are inconsistent with the operation's contract."""


class DomainError(BsfError, ValueError):
    """A value lies outside its legal domain (e.g. probability not in [0,1])."""


class StateError(BsfError, RuntimeError):
    """Operation invoked against stale or missing state (e.g. backward
    without a matching training-mode forward trace)."""


class CapacityError(BsfError, ValueError):
    """Request exceeds a documented size bound (e.g. enumeration over 2^d)."""


class StructureError(BsfError, ValueError):
    """Network topology does not admit the requested transformation."""


class DegenerateModelError(BsfError, RuntimeError):
    """A transformation would leave the model without any computational
    path (e.g. pruning removed every unit of a layer)."""


class DataError(BsfError, ValueError):
    """Malformed external data (CSV ingestion, checkpoint files)."""


class ConfigError(BsfError, ValueError):
    """Invalid or unknown configuration keys/values."""


class TrainingDivergedError(BsfError, RuntimeError):
    """Loss became non-finite during training."""
