"""Plain-text experiment configuration files.

INI syntax, one section per workflow plus a shared [train] section:

    [train]
    learning_rate = 0.001
    max_epochs = 80

    [select]
    penalty = grid
    folds = 5

Unknown sections or keys are errors — configs never fail silently.
"""

import configparser

from ..exceptions import ConfigError


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def _ints(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def _penalty(text: str):
    text = text.strip()
    if text == "grid":
        return "grid"
    values = [float(v) for v in text.split(",") if v.strip()]
    if not values:
        raise ConfigError("empty penalty list")
    return values[0] if len(values) == 1 else values


def _peaks(text: str):
    text = text.strip()
    if "|" not in text and "," not in text:
        return int(text)
    return [[float(v) for v in part.split(",") if v.strip()]
            for part in text.split("|")]


_SCHEMA: dict[str, dict] = {
    "train": {
        "optimizer": str,
        "learning_rate": float,
        "batch_size": int,
        "max_epochs": int,
        "patience": int,
        "val_fraction": float,
    },
    "select": {
        "penalty": _penalty,
        "folds": int,
        "tau": float,
        "hidden": _ints,
        "scaled_grad": _bool,
        "seed": int,
        "metric_drop_tolerance": float,
    },
    "prune": {
        "penalty": _penalty,
        "tau": float,
        "hidden": _ints,
        "scaled_grad": _bool,
        "seed": int,
        "warmup_epochs": int,
    },
    "regions": {
        "penalty": float,
        "tau": float,
        "channels": _ints,
        "kernel_width": int,
        "scaled_grad": _bool,
        "seed": int,
        "warmup_epochs": int,
    },
    "lab": {
        "n": int,
        "d": int,
        "seed": int,
        "penalty": float,
        "draws": int,
    },
    "synth": {
        "kind": str,
        "seed": int,
        "n_samples": int,
        "n_features": int,
        "n_informative": int,
        "class_sep": float,
        "interaction": float,
        "length": int,
        "n_classes": int,
        "peaks_per_class": _peaks,
        "peak_sigma": float,
        "noise": float,
        "n_shared_peaks": int,
    },
}


def load_config(path: str) -> dict[str, dict]:
    """Parse and type-check a config file; returns {section: {key: value}}."""
    parser = configparser.ConfigParser(interpolation=None)
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc

    out: dict[str, dict] = {}
    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigError(
                f"{path}: unknown section [{section}] "
                f"(expected one of {sorted(_SCHEMA)})"
            )
        out[section] = {}
        for key, raw in parser.items(section):
            if key not in _SCHEMA[section]:
                raise ConfigError(
                    f"{path}: unknown key {key!r} in [{section}] "
                    f"(expected one of {sorted(_SCHEMA[section])})"
                )
            try:
                out[section][key] = _SCHEMA[section][key](raw)
            except ConfigError:
                raise
            except (TypeError, ValueError) as exc:
                raise ConfigError(
                    f"{path}: bad value for {key!r} in [{section}]: {exc}"
                ) from exc
    return out
