"""Tabular dataset ingestion and standardization."""

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from ..core import DTYPE, as_tensor
from ..exceptions import DataError, ShapeError


@dataclass
class Dataset:
    """Feature matrix (n, d) with integer class labels (n,).

    ``rejected_rows`` counts CSV rows dropped during ingestion (wrong arity,
    unparsable or missing cells); accepted data never contains NaN/inf.
    """

    x: np.ndarray
    y: np.ndarray
    feature_names: list[str]
    label_names: list[str]
    rejected_rows: int = 0

    def __post_init__(self):
        self.x = as_tensor(self.x)
        self.y = np.asarray(self.y, dtype=np.int64)
        if self.x.ndim != 2:
            raise ShapeError("features must be (n, d)")
        if self.y.shape != (self.x.shape[0],):
            raise ShapeError("one label per row required")
        if not np.all(np.isfinite(self.x)):
            raise DataError("features contain non-finite values")
        if self.x.shape[1] != len(self.feature_names):
            raise ShapeError("feature name count must match feature columns")
        if self.y.size and (self.y.min() < 0 or self.y.max() >= len(self.label_names)):
            raise DataError("label id outside declared classes")

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def d(self) -> int:
        return self.x.shape[1]

    @property
    def n_classes(self) -> int:
        return len(self.label_names)

    def describe(self) -> dict:
        return {
            "rows": self.n,
            "features": self.d,
            "classes": self.label_names,
            "rejected_rows": self.rejected_rows,
        }


def _label_order(values: set[str]) -> list[str]:
    """Deterministic class ordering: numeric when every label parses as a
    number, lexicographic otherwise."""
    try:
        return sorted(values, key=lambda s: (float(s), s))
    except ValueError:
        return sorted(values)


def parse_csv_text(text: str, label_column: str = "label", delimiter: str = ",") -> Dataset:
    """Parse headed CSV content into a Dataset.

    Rows that do not match the header arity, or with any cell that fails to
    parse as a finite float (label cells excepted), or with empty cells, are
    rejected and counted — never silently imputed.
    """
    reader = csv.reader(io.StringIO(text), delimiter=delimiter)
    try:
        header = next(reader)
    except StopIteration:
        raise DataError("empty CSV") from None
    header = [h.strip() for h in header]
    if label_column not in header:
        raise DataError(f"no column named {label_column!r}")
    label_idx = header.index(label_column)
    feature_names = [h for i, h in enumerate(header) if i != label_idx]

    rows: list[list[float]] = []
    labels: list[str] = []
    rejected = 0
    for raw in reader:
        if len(raw) != len(header):
            rejected += 1
            continue
        label = raw[label_idx].strip()
        if not label:
            rejected += 1
            continue
        try:
            values = [float(cell) for i, cell in enumerate(raw) if i != label_idx]
        except ValueError:
            rejected += 1
            continue
        if not all(np.isfinite(values)):
            rejected += 1
            continue
        rows.append(values)
        labels.append(label)

    if not rows:
        raise DataError(f"no parsable data rows (rejected {rejected})")
    label_names = _label_order(set(labels))
    mapping = {name: i for i, name in enumerate(label_names)}
    return Dataset(
        x=np.array(rows, dtype=DTYPE),
        y=np.array([mapping[l] for l in labels], dtype=np.int64),
        feature_names=feature_names,
        label_names=label_names,
        rejected_rows=rejected,
    )


def load_csv(path: str, label_column: str = "label", delimiter: str = ",") -> Dataset:
    with open(path, newline="", encoding="utf-8") as fh:
        text = fh.read()
    try:
        return parse_csv_text(text, label_column=label_column, delimiter=delimiter)
    except DataError as exc:
        raise DataError(f"{path}: {exc}") from None


def dataset_to_csv(dataset: Dataset, label_column: str = "label") -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(dataset.feature_names + [label_column])
    for row, label in zip(dataset.x, dataset.y):
        writer.writerow([repr(float(v)) for v in row] + [dataset.label_names[label]])
    return out.getvalue()


def save_csv(dataset: Dataset, path: str, label_column: str = "label"):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(dataset_to_csv(dataset, label_column=label_column))


@dataclass
class Standardizer:
    """Per-feature centering/scaling; fit strictly on training rows."""

    mean: np.ndarray = field(default=None)
    scale: np.ndarray = field(default=None)

    def fit(self, x: np.ndarray) -> "Standardizer":
        x = as_tensor(x)
        self.mean = x.mean(axis=0)
        std = x.std(axis=0)
        self.scale = np.where(std > 0.0, std, 1.0)
        return self

    def transform(self, x: np.ndarray) -> np.ndarray:
        if self.mean is None:
            raise DataError("standardizer used before fit")
        return (as_tensor(x) - self.mean) / self.scale
