"""Seeded synthetic dataset generators with known ground truth."""

import numpy as np

from ..core import DTYPE, RngStream
from ..exceptions import ConfigError
from .data import Dataset

_LABEL_DOMAIN = 0x51
_DIR_DOMAIN = 0x52
_NOISE_DOMAIN = 0x53
_PICK_DOMAIN = 0x54
_BASE_DOMAIN = 0x55
_AMP_DOMAIN = 0x56
_SHARED_DOMAIN = 0x57


def _balanced_labels(n: int, n_classes: int, rng: RngStream) -> np.ndarray:
    """Near-equal class counts (first classes take the remainder), shuffled."""
    counts = [n // n_classes + (1 if c < n % n_classes else 0) for c in range(n_classes)]
    y = np.repeat(np.arange(n_classes, dtype=np.int64), counts)
    return y[rng.generator().permutation(n)]


def make_informative_classification(
    n_samples: int,
    n_features: int,
    n_informative: int,
    class_sep: float = 2.0,
    seed: int = 0,
    interaction: float = 0.0,
) -> tuple[Dataset, dict]:
    """Two-class dataset where labels depend only on a known feature subset.

    All features start as independent standard normals. The two classes'
    means differ by ``class_sep`` along a random unit direction inside the
    informative subspace (so a linear model on the informative features has
    Bayes accuracy Phi(class_sep / 2): ~0.93 at 3, ~1.0 at 10), and the
    remaining features carry no class information. A positive ``interaction``
    moves part of the separation into the product structure of the first two
    informative coordinates, which only a nonlinear model can fully use.

    Returns the dataset and {"informative_indices": sorted list}.
    """
    if not 1 <= n_informative <= n_features:
        raise ConfigError("need 1 <= n_informative <= n_features")
    if interaction > 0 and n_informative < 2:
        raise ConfigError("interaction requires at least 2 informative features")
    if class_sep < 0:
        raise ConfigError("class_sep must be non-negative")
    root = RngStream(seed)
    y = _balanced_labels(n_samples, 2, root.child(_LABEL_DOMAIN))
    x = root.child(_NOISE_DOMAIN).generator().standard_normal((n_samples, n_features))

    informative = np.sort(
        root.child(_PICK_DOMAIN).generator().choice(n_features, size=n_informative, replace=False)
    )
    direction = root.child(_DIR_DOMAIN).generator().standard_normal(n_informative)
    direction /= np.linalg.norm(direction)
    signed = (2.0 * y - 1.0).astype(DTYPE)
    shift = class_sep / 2.0
    x[:, informative] += np.outer(signed * shift * (1.0 - interaction), direction)
    if interaction > 0:
        a, b = informative[0], informative[1]
        x[:, a] += interaction * shift * signed * np.sign(x[:, b])

    dataset = Dataset(
        x=x,
        y=y,
        feature_names=[f"f{i}" for i in range(n_features)],
        label_names=["0", "1"],
    )
    return dataset, {"informative_indices": [int(i) for i in informative]}


def _auto_peak_positions(length: int, n_classes: int, per_class: int) -> list[list[float]]:
    total = n_classes * per_class
    return [
        [length * (c * per_class + j + 1) / (total + 1) for j in range(per_class)]
        for c in range(n_classes)
    ]


def make_synthetic_spectra(
    n_samples: int,
    length: int = 256,
    n_classes: int = 2,
    peaks_per_class: int | list = 1,
    peak_sigma: float = 3.0,
    noise: float = 0.05,
    seed: int = 0,
    n_shared_peaks: int = 2,
) -> tuple[Dataset, dict]:
    """Smooth 1-D "spectra" whose classes differ only at known peak positions.

    Each sample is a random low-order polynomial baseline plus Gaussian peaks:
    a set of nuisance peaks shared by every class, and per-class peaks that
    carry all of the class signal. White noise of the given level is added.

    ``peaks_per_class`` is either a per-class count (positions spread
    deterministically over the axis) or an explicit list of position lists.
    The ground truth marks positions within 2 standard deviations of any
    class peak: {"region_mask": 0/1 list, "class_peaks": ..., "shared_peaks": ...}.
    """
    if isinstance(peaks_per_class, int):
        if peaks_per_class < 1:
            raise ConfigError("peaks_per_class must be >= 1")
        class_peaks = _auto_peak_positions(length, n_classes, peaks_per_class)
    else:
        class_peaks = [[float(p) for p in row] for row in peaks_per_class]
        if len(class_peaks) != n_classes:
            raise ConfigError("one peak list per class required")
    for row in class_peaks:
        for pos in row:
            if not 0 <= pos < length:
                raise ConfigError(f"peak position {pos} outside [0, {length})")

    root = RngStream(seed)
    y = _balanced_labels(n_samples, n_classes, root.child(_LABEL_DOMAIN))
    t = np.arange(length, dtype=DTYPE)
    t_hat = 2.0 * t / max(length - 1, 1) - 1.0

    base_gen = root.child(_BASE_DOMAIN).generator()
    coeffs = base_gen.normal(0.0, 1.0, size=(n_samples, 3)) * np.array([0.3, 0.2, 0.1])
    x = coeffs @ np.vstack([np.ones_like(t_hat), t_hat, t_hat**2])

    shared_gen = root.child(_SHARED_DOMAIN).generator()
    shared_peaks = []
    guard = 4.0 * peak_sigma
    flat_class = [p for row in class_peaks for p in row]
    attempts = 0
    while len(shared_peaks) < n_shared_peaks and attempts < 1000:
        attempts += 1
        pos = float(shared_gen.uniform(0.08 * length, 0.92 * length))
        if all(abs(pos - q) > guard for q in flat_class + shared_peaks):
            shared_peaks.append(pos)

    amp_gen = root.child(_AMP_DOMAIN).generator()

    def bump(position: float) -> np.ndarray:
        return np.exp(-0.5 * ((t - position) / peak_sigma) ** 2)

    for pos in shared_peaks:
        x += amp_gen.uniform(0.8, 1.2, size=(n_samples, 1)) * bump(pos)
    for c, row in enumerate(class_peaks):
        members = y == c
        for pos in row:
            amps = amp_gen.uniform(0.8, 1.2, size=(n_samples, 1))
            x += np.where(members[:, None], amps, 0.0) * bump(pos)

    x += root.child(_NOISE_DOMAIN).generator().normal(0.0, noise, size=x.shape)

    mask = np.zeros(length, dtype=np.int64)
    for pos in flat_class:
        lo = max(0, int(np.ceil(pos - 2.0 * peak_sigma)))
        hi = min(length - 1, int(np.floor(pos + 2.0 * peak_sigma)))
        mask[lo : hi + 1] = 1

    dataset = Dataset(
        x=x,
        y=y,
        feature_names=[f"pos_{i}" for i in range(length)],
        label_names=[str(c) for c in range(n_classes)],
    )
    truth = {
        "region_mask": mask.tolist(),
        "class_peaks": class_peaks,
        "shared_peaks": shared_peaks,
    }
    return dataset, truth
