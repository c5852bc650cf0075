"""Request/response models for the HTTP service."""

from pydantic import BaseModel, ConfigDict, Field, model_validator


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class TrainSettings(StrictModel):
    optimizer: str = "adam"
    learning_rate: float = Field(1e-3, gt=0)
    batch_size: int = Field(32, ge=1)
    max_epochs: int = Field(80, ge=0)
    patience: int = Field(20, ge=0)
    val_fraction: float = Field(0.2, ge=0, lt=1)


class DataPayload(StrictModel):
    """Inline CSV content, so remote servers need no shared filesystem."""

    csv_text: str
    label_column: str = "label"
    delimiter: str = ","


class InformativeSpec(StrictModel):
    n_samples: int = Field(2000, ge=8)
    n_features: int = Field(20, ge=1)
    n_informative: int = Field(5, ge=1)
    class_sep: float = Field(3.0, ge=0)
    interaction: float = Field(0.0, ge=0)
    seed: int | None = None


class SpectraSpec(StrictModel):
    n_samples: int = Field(300, ge=8)
    length: int = Field(256, ge=8)
    n_classes: int = Field(2, ge=2)
    peaks_per_class: int | list[list[float]] = 1
    peak_sigma: float = Field(3.0, gt=0)
    noise: float = Field(0.05, ge=0)
    n_shared_peaks: int = Field(2, ge=0)
    seed: int | None = None


class _DatasetCarrier(StrictModel):
    data: DataPayload | None = None

    @model_validator(mode="after")
    def _exactly_one_source(self):
        if (self.data is None) == (getattr(self, "synth", None) is None):
            raise ValueError("provide exactly one of 'data' and 'synth'")
        return self


class SelectRequest(_DatasetCarrier):
    synth: InformativeSpec | None = None
    penalty: float | list[float] | str = "grid"
    folds: int = Field(10, ge=2)
    tau: float = Field(0.25, ge=0, lt=1)
    hidden: list[int] = Field(default_factory=lambda: [32])
    scaled_grad: bool = True
    seed: int = 0
    metric_drop_tolerance: float = 0.05
    train: TrainSettings = Field(default_factory=TrainSettings)


def _structural_train_settings() -> TrainSettings:
    # mirrors the structural workflows' faster default schedule
    return TrainSettings(learning_rate=5e-3, max_epochs=45)


class PruneExperimentRequest(_DatasetCarrier):
    synth: InformativeSpec | None = None
    penalty: float | list[float] | str = "grid"
    tau: float = Field(0.25, ge=0, lt=1)
    hidden: list[int] = Field(default_factory=lambda: [256, 256])
    scaled_grad: bool = True
    seed: int = 0
    warmup_epochs: int = Field(15, ge=0)
    train: TrainSettings = Field(default_factory=_structural_train_settings)


class RegionRequest(_DatasetCarrier):
    synth: SpectraSpec | None = None
    penalty: float = Field(1e-2, ge=0)
    tau: float = Field(0.25, ge=0, lt=1)
    channels: list[int] = Field(default_factory=lambda: [8])
    kernel_width: int = Field(5, ge=1)
    scaled_grad: bool = False
    seed: int = 0
    warmup_epochs: int = Field(15, ge=0)
    ground_truth_mask: list[int] | None = None
    train: TrainSettings = Field(default_factory=_structural_train_settings)


class LabRequest(StrictModel):
    n: int = Field(6, ge=1)
    d: int = Field(6, ge=1)
    seed: int = 0
    penalty: float = Field(0.0, ge=0)
    draws: int = Field(20_000, ge=2)


class SynthRequest(StrictModel):
    kind: str  # "informative" | "spectra"
    seed: int = 0
    informative: InformativeSpec | None = None
    spectra: SpectraSpec | None = None


class CheckpointPruneRequest(StrictModel):
    checkpoint: str
    tau: float | None = Field(None, ge=0, lt=1)


class Report(BaseModel):
    schema_version: int
    workflow: str
    config: dict
    results: dict
    timing: dict


class SynthResponse(BaseModel):
    csv_text: str
    report: Report


class CheckpointPruneResponse(BaseModel):
    checkpoint: str
    report: Report


class HealthResponse(BaseModel):
    status: str
    version: str
