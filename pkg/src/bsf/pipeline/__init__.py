from .config import load_config
from .data import (
    Dataset,
    Standardizer,
    dataset_to_csv,
    load_csv,
    parse_csv_text,
    save_csv,
)
from .experiments import (
    DEFAULT_PENALTY_GRID,
    PruneConfig,
    RegionConfig,
    SelectConfig,
    TrainSpec,
    resolve_penalties,
    run_feature_selection,
    run_lab,
    run_pruning_experiment,
    run_region_selection,
)
from .metrics import macro_f1, stratified_kfold
from .synth import make_informative_classification, make_synthetic_spectra

__all__ = [
    "DEFAULT_PENALTY_GRID",
    "Dataset",
    "PruneConfig",
    "RegionConfig",
    "SelectConfig",
    "Standardizer",
    "TrainSpec",
    "dataset_to_csv",
    "load_config",
    "load_csv",
    "macro_f1",
    "make_informative_classification",
    "make_synthetic_spectra",
    "parse_csv_text",
    "resolve_penalties",
    "run_feature_selection",
    "run_lab",
    "run_pruning_experiment",
    "run_region_selection",
    "save_csv",
    "stratified_kfold",
]
