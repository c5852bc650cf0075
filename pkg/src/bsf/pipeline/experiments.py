"""End-to-end workflows: feature selection, pruning sweeps, region selection,
and the expected-objective verification lab.

Every workflow returns a plain-JSON report dict:

    {"schema_version": 1, "workflow": ..., "config": {...},
     "results": {...}, "timing": {"wall_time_s": ...}}

All numbers inside results are reproducible from the config (seeded streams
everywhere); only the timing block varies between runs.
"""

import time
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from ..core import RngStream, derive_seed
from ..exceptions import ConfigError, DegenerateModelError
from ..gating import BsfGate, identity_groups, position_groups
from ..net import Dense, Flatten, Network, Relu, TrainConfig, train
from ..net.layers import Conv1d
from ..pruning import normalized_penalties, prune
from .. import reglab
from .data import Dataset, Standardizer
from .metrics import macro_f1, stratified_kfold

SCHEMA_VERSION = 1

DEFAULT_PENALTY_GRID = [float(v) for v in np.geomspace(1e-4, 1e1, 11)]

_REF_ROLE = 1
_GATE_ROLE = 2


def resolve_penalties(spec) -> list[float]:
    """Accepts 'grid', a number, or a sequence of numbers."""
    if isinstance(spec, str):
        if spec == "grid":
            return list(DEFAULT_PENALTY_GRID)
        raise ConfigError(f"unknown penalty spec {spec!r} (expected 'grid' or numbers)")
    if isinstance(spec, (int, float)):
        values = [float(spec)]
    else:
        values = [float(v) for v in spec]
    if not values or any(v < 0 for v in values):
        raise ConfigError("penalties must be non-negative")
    return values


@dataclass
class TrainSpec:
    """User-facing training knobs shared by the workflows."""

    optimizer: str = "adam"
    learning_rate: float = 1e-3
    batch_size: int = 32
    max_epochs: int = 80
    patience: int = 20
    val_fraction: float = 0.2

    def to_config(self, seed: int, penalty=None, full_schedule: bool = False) -> TrainConfig:
        """Penalized gate runs use the full schedule (no early stop, keep the
        last epoch) so sparsity pressure is not rolled back to an early
        best-validation snapshot; plain runs keep standard early stopping."""
        return TrainConfig(
            optimizer=self.optimizer,
            learning_rate=self.learning_rate,
            batch_size=self.batch_size,
            max_epochs=self.max_epochs,
            patience=0 if full_schedule else self.patience,
            val_fraction=self.val_fraction,
            penalty=penalty,
            restore_best=not full_schedule,
            seed=seed,
        )


def _mlp_layers(d_in: int, hidden: list[int], n_classes: int) -> list:
    layers: list = []
    prev = d_in
    for h in hidden:
        layers += [Dense(prev, h), Relu()]
        prev = h
    layers.append(Dense(prev, n_classes))
    return layers


def _predict_labels(net: Network, x: np.ndarray) -> np.ndarray:
    return np.argmax(net.predict(x), axis=1)


def _report(workflow: str, config: dict, results: dict, started: float) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "workflow": workflow,
        "config": config,
        "results": results,
        "timing": {"wall_time_s": time.perf_counter() - started},
    }


def _holdout_split(y: np.ndarray, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic 25% stratified holdout (fold 0 of a 4-fold split)."""
    test = stratified_kfold(y, 4, seed)[0]
    mask = np.ones(len(y), dtype=bool)
    mask[test] = False
    return np.flatnonzero(mask), test


# --------------------------------------------------------------------------
# feature selection
# --------------------------------------------------------------------------


@dataclass
class SelectConfig:
    penalty: object = "grid"
    folds: int = 10
    tau: float = 0.25
    hidden: list[int] = field(default_factory=lambda: [32])
    scaled_grad: bool = True
    seed: int = 0
    metric_drop_tolerance: float = 0.05
    train: TrainSpec = field(default_factory=TrainSpec)


def run_feature_selection(dataset: Dataset, cfg: SelectConfig,
                          ground_truth: list[int] | None = None) -> dict:
    """Per-fold: train a reference net, train a gated net under each penalty,
    retrain the reference architecture on the selected features, compare F1.

    The selected-subset retraining reuses the reference training's seed, so
    selecting every feature reproduces the reference run exactly.
    """
    started = time.perf_counter()
    penalties = resolve_penalties(cfg.penalty)
    folds = stratified_kfold(dataset.y, cfg.folds, cfg.seed)
    n_classes = dataset.n_classes

    fold_entries = []
    for fold_i, test_idx in enumerate(folds):
        train_mask = np.ones(dataset.n, dtype=bool)
        train_mask[test_idx] = False
        train_idx = np.flatnonzero(train_mask)
        scaler = Standardizer().fit(dataset.x[train_idx])
        x_tr, y_tr = scaler.transform(dataset.x[train_idx]), dataset.y[train_idx]
        x_te, y_te = scaler.transform(dataset.x[test_idx]), dataset.y[test_idx]

        ref_seed = derive_seed(cfg.seed, fold_i, _REF_ROLE)
        ref_net = Network(dataset.d, _mlp_layers(dataset.d, cfg.hidden, n_classes))
        train(ref_net, x_tr, y_tr, cfg.train.to_config(ref_seed))
        f1_ref = macro_f1(y_te, _predict_labels(ref_net, x_te), n_classes)

        runs = []
        for pen_i, penalty in enumerate(penalties):
            gate = BsfGate(n_gates=dataset.d, groups=identity_groups(dataset.d),
                           tau=cfg.tau, scaled_grad=cfg.scaled_grad)
            gated = Network(dataset.d,
                            [gate] + _mlp_layers(dataset.d, cfg.hidden, n_classes))
            gate_seed = derive_seed(cfg.seed, fold_i, _GATE_ROLE, pen_i)
            train(gated, x_tr, y_tr,
                  cfg.train.to_config(gate_seed, penalty=penalty, full_schedule=True))
            selected = gate.selected_indices()
            entry = {
                "penalty": penalty,
                "selected": selected,
                "n_selected": len(selected),
                "gate_values": [float(v) for v in gate.p],
            }
            if not selected:
                entry["failed"] = ("no features survive the threshold; "
                                   "penalty is too large for this data")
                entry["f1_selected"] = None
                entry["delta_f1"] = None
            else:
                sub_net = Network(len(selected),
                                  _mlp_layers(len(selected), cfg.hidden, n_classes))
                train(sub_net, x_tr[:, selected], y_tr, cfg.train.to_config(ref_seed))
                f1_sel = macro_f1(y_te, _predict_labels(sub_net, x_te[:, selected]),
                                  n_classes)
                entry["f1_selected"] = f1_sel
                entry["delta_f1"] = f1_sel - f1_ref
            runs.append(entry)
        fold_entries.append({
            "fold": fold_i,
            "test_rows": int(len(test_idx)),
            "f1_reference": f1_ref,
            "runs": runs,
        })

    per_penalty = []
    for pen_i, penalty in enumerate(penalties):
        rows = [f["runs"][pen_i] for f in fold_entries]
        ok = [r for r in rows if "failed" not in r]
        votes = np.zeros(dataset.d, dtype=np.int64)
        for r in rows:
            votes[r["selected"]] += 1
        majority = [int(i) for i in np.flatnonzero(votes > len(rows) / 2)]
        agg = {
            "penalty": penalty,
            "failed_folds": len(rows) - len(ok),
            "mean_delta_f1": float(np.mean([r["delta_f1"] for r in ok])) if ok else None,
            "mean_n_selected": float(np.mean([r["n_selected"] for r in ok])) if ok else None,
            "majority_selected": majority,
            "mean_gate_values": [float(v) for v in
                                 np.mean([r["gate_values"] for r in rows], axis=0)],
            "selected_fraction": [float(v) for v in votes / len(rows)],
        }
        if ground_truth is not None:
            truth = set(int(i) for i in ground_truth)
            chosen = set(majority)
            agg["precision"] = (len(truth & chosen) / len(chosen)) if chosen else 0.0
            agg["recall"] = len(truth & chosen) / len(truth) if truth else 0.0
        per_penalty.append(agg)

    candidates = [a for a in per_penalty
                  if a["failed_folds"] == 0 and a["mean_delta_f1"] is not None
                  and a["mean_delta_f1"] >= -cfg.metric_drop_tolerance]
    recommended = None
    if candidates:
        best = min(candidates, key=lambda a: (a["mean_n_selected"], -a["penalty"]))
        recommended = best["penalty"]

    plot_rows = []
    for agg in per_penalty:
        for j in range(dataset.d):
            plot_rows.append([agg["penalty"], j, agg["mean_gate_values"][j],
                              agg["selected_fraction"][j]])

    config_echo = {
        "workflow_seed": cfg.seed,
        "penalties": penalties,
        "folds": cfg.folds,
        "tau": cfg.tau,
        "hidden": list(cfg.hidden),
        "scaled_grad": cfg.scaled_grad,
        "metric_drop_tolerance": cfg.metric_drop_tolerance,
        "train": asdict(cfg.train),
        "dataset": dataset.describe(),
        "ground_truth_features": sorted(int(i) for i in ground_truth)
        if ground_truth is not None else None,
    }
    results = {
        "folds": fold_entries,
        "per_penalty": per_penalty,
        "recommended_penalty": recommended,
        "mean_f1_reference": float(np.mean([f["f1_reference"] for f in fold_entries])),
        "plot_data": {
            "columns": ["penalty", "feature_index", "mean_gate_value",
                        "selected_fraction"],
            "rows": plot_rows,
        },
    }
    return _report("feature-selection", config_echo, results, started)


# --------------------------------------------------------------------------
# pruning sweep
# --------------------------------------------------------------------------


@dataclass
class PruneConfig:
    penalty: object = "grid"
    tau: float = 0.25
    hidden: list[int] = field(default_factory=lambda: [256, 256])
    scaled_grad: bool = True
    seed: int = 0
    # A few unpenalized epochs let every unit develop its real usefulness
    # before the sparsity race starts; otherwise the penalty prunes units
    # whose weights merely had not matured yet.
    warmup_epochs: int = 15
    # Adam moves each gate probability by at most ~learning_rate per step, so
    # a unit gate must travel 1.0 -> tau within steps*lr; the structural
    # workflows default to a faster schedule than plain fitting needs.
    train: TrainSpec = field(
        default_factory=lambda: TrainSpec(learning_rate=5e-3, max_epochs=45))


def _gated_mlp(d_in: int, hidden: list[int], n_classes: int, tau: float,
               scaled_grad: bool) -> Network:
    """Dense stack with a unit gate after each hidden activation."""
    layers: list = []
    prev = d_in
    for h in hidden:
        layers += [Dense(prev, h), Relu(),
                   BsfGate(n_gates=h, tau=tau, scaled_grad=scaled_grad)]
        prev = h
    layers.append(Dense(prev, n_classes))
    return Network(d_in, layers)


def run_pruning_experiment(dataset: Dataset, cfg: PruneConfig) -> dict:
    """Sweep the base penalty; per point train a gated net (per-layer penalty
    base/width), prune it structurally, and score the pruned model against an
    ungated reference on a 25% stratified holdout."""
    started = time.perf_counter()
    penalties = resolve_penalties(cfg.penalty)
    train_idx, test_idx = _holdout_split(dataset.y, cfg.seed)
    scaler = Standardizer().fit(dataset.x[train_idx])
    x_tr, y_tr = scaler.transform(dataset.x[train_idx]), dataset.y[train_idx]
    x_te, y_te = scaler.transform(dataset.x[test_idx]), dataset.y[test_idx]
    n_classes = dataset.n_classes

    ref_seed = derive_seed(cfg.seed, _REF_ROLE)
    ref_net = Network(dataset.d, _mlp_layers(dataset.d, cfg.hidden, n_classes))
    train(ref_net, x_tr, y_tr, cfg.train.to_config(ref_seed))
    f1_ref = macro_f1(y_te, _predict_labels(ref_net, x_te), n_classes)

    points = []
    for pen_i, base in enumerate(penalties):
        gated = _gated_mlp(dataset.d, cfg.hidden, n_classes, cfg.tau, cfg.scaled_grad)
        per_layer = normalized_penalties(gated, base)
        gate_seed = derive_seed(cfg.seed, _GATE_ROLE, pen_i)
        if cfg.warmup_epochs:
            warm = replace(cfg.train, max_epochs=cfg.warmup_epochs)
            train(gated, x_tr, y_tr,
                  warm.to_config(gate_seed, penalty=0.0, full_schedule=True))
            gate_seed = derive_seed(gate_seed, 1)
        train(gated, x_tr, y_tr,
              cfg.train.to_config(gate_seed, penalty=per_layer, full_schedule=True))
        point = {"penalty": base, "per_layer_penalties": per_layer}
        try:
            pruned, prune_report = prune(gated)
        except DegenerateModelError as exc:
            point["failed"] = str(exc)
            point["kept_fraction"] = None
            point["f1_pruned"] = None
            point["delta_f1"] = None
        else:
            f1 = macro_f1(y_te, _predict_labels(pruned, x_te), n_classes)
            point["kept_fraction"] = prune_report.weights_kept_fraction
            point["kept_units"] = [g.kept for g in prune_report.gates]
            point["total_units"] = [g.total for g in prune_report.gates]
            point["f1_pruned"] = f1
            point["delta_f1"] = f1 - f1_ref
        points.append(point)

    plot_rows = [[p["penalty"], p["kept_fraction"], p["delta_f1"]]
                 for p in points if "failed" not in p]
    config_echo = {
        "workflow_seed": cfg.seed,
        "penalties": penalties,
        "tau": cfg.tau,
        "hidden": list(cfg.hidden),
        "scaled_grad": cfg.scaled_grad,
        "warmup_epochs": cfg.warmup_epochs,
        "train": asdict(cfg.train),
        "holdout": "stratified 25% (fold 0 of 4)",
        "dataset": dataset.describe(),
    }
    results = {
        "f1_reference": f1_ref,
        "points": points,
        "sweep_note": ("kept_fraction is expected to be non-increasing in the "
                       "penalty up to +/-1 grid-point noise"),
        "plot_data": {
            "columns": ["penalty", "kept_fraction", "delta_f1"],
            "rows": plot_rows,
        },
    }
    return _report("pruning", config_echo, results, started)


# --------------------------------------------------------------------------
# region selection
# --------------------------------------------------------------------------


@dataclass
class RegionConfig:
    penalty: float = 1e-2
    tau: float = 0.25
    # One narrow conv keeps the receptive field tight, so surviving gate
    # positions line up with the input positions that actually carry signal
    # instead of with a smeared halo around them.
    channels: list[int] = field(default_factory=lambda: [8])
    kernel_width: int = 5
    # Unscaled gate gradients keep a position's data-term resistance constant
    # as its probability falls; the scaled variant starves weak-but-genuine
    # positions (rich-get-richer) and fragments the recovered regions.
    scaled_grad: bool = False
    seed: int = 0
    warmup_epochs: int = 15  # see PruneConfig
    # Position gates share the unit-gate travel constraint (see PruneConfig).
    train: TrainSpec = field(
        default_factory=lambda: TrainSpec(learning_rate=5e-3, max_epochs=45))


def _runs_of(selected: np.ndarray) -> list[dict]:
    runs = []
    start = None
    for i, flag in enumerate(selected):
        if flag and start is None:
            start = i
        elif not flag and start is not None:
            runs.append({"start": start, "end": i - 1, "length": i - start})
            start = None
    if start is not None:
        runs.append({"start": start, "end": len(selected) - 1,
                     "length": len(selected) - start})
    return runs


def _conv_stack(length: int, channels: list[int], width: int, n_classes: int,
                gate: BsfGate | None) -> Network:
    layers: list = []
    prev = 1
    for ch in channels:
        layers += [Conv1d(prev, ch, width), Relu()]
        prev = ch
    if gate is not None:
        layers.append(gate)
    layers += [Flatten(), Dense(length * prev, n_classes)]
    return Network((length, 1), layers)


def run_region_selection(dataset: Dataset, cfg: RegionConfig,
                         ground_truth_mask: list[int] | None = None) -> dict:
    """Train a conv classifier with one gate per spectral position (shared
    across channels) on a 25% stratified holdout; report the surviving
    positions as contiguous runs, with IoU against ground truth when known.

    The selected-region model retrains the ungated architecture on inputs
    zeroed outside the selection, mirroring how a narrowed sensor would see
    the spectrum."""
    started = time.perf_counter()
    length = dataset.d
    n_classes = dataset.n_classes
    train_idx, test_idx = _holdout_split(dataset.y, cfg.seed)
    scaler = Standardizer().fit(dataset.x[train_idx])
    x_tr = scaler.transform(dataset.x[train_idx])[:, :, None]
    x_te = scaler.transform(dataset.x[test_idx])[:, :, None]
    y_tr, y_te = dataset.y[train_idx], dataset.y[test_idx]

    ref_seed = derive_seed(cfg.seed, _REF_ROLE)
    ref_net = _conv_stack(length, cfg.channels, cfg.kernel_width, n_classes, None)
    train(ref_net, x_tr, y_tr, cfg.train.to_config(ref_seed))
    f1_ref = macro_f1(y_te, _predict_labels(ref_net, x_te), n_classes)

    gate = BsfGate(
        n_gates=length,
        groups=position_groups(length, cfg.channels[-1]),
        tau=cfg.tau,
        penalty=cfg.penalty,
        scaled_grad=cfg.scaled_grad,
    )
    gated = _conv_stack(length, cfg.channels, cfg.kernel_width, n_classes, gate)
    gate_seed = derive_seed(cfg.seed, _GATE_ROLE)
    if cfg.warmup_epochs:
        warm = replace(cfg.train, max_epochs=cfg.warmup_epochs)
        train(gated, x_tr, y_tr,
              warm.to_config(gate_seed, penalty=0.0, full_schedule=True))
        gate_seed = derive_seed(gate_seed, 1)
    train(gated, x_tr, y_tr,
          cfg.train.to_config(gate_seed, penalty=cfg.penalty, full_schedule=True))

    selected = gate.p > cfg.tau
    entry_runs = _runs_of(selected)
    results = {
        "f1_reference": f1_ref,
        "gate_values": [float(v) for v in gate.p],
        "selected_positions": [int(i) for i in np.flatnonzero(selected)],
        "n_selected": int(selected.sum()),
        "runs": entry_runs,
    }

    if selected.any():
        keep = selected.astype(float)[None, :, None]
        sub_net = _conv_stack(length, cfg.channels, cfg.kernel_width, n_classes, None)
        train(sub_net, x_tr * keep, y_tr, cfg.train.to_config(ref_seed))
        f1_sel = macro_f1(y_te, _predict_labels(sub_net, x_te * keep), n_classes)
        results["f1_selected"] = f1_sel
        results["delta_f1"] = f1_sel - f1_ref
    else:
        results["failed"] = "no positions survive the threshold; penalty too large"
        results["f1_selected"] = None
        results["delta_f1"] = None

    if ground_truth_mask is not None:
        truth = np.asarray(ground_truth_mask, dtype=bool)
        inter = int((selected & truth).sum())
        union = int((selected | truth).sum())
        results["iou"] = inter / union if union else 0.0
        results["ground_truth_positions"] = int(truth.sum())

    results["plot_data"] = {
        "columns": ["position", "gate_value", "selected"],
        "rows": [[i, float(gate.p[i]), int(selected[i])] for i in range(length)],
    }
    config_echo = {
        "workflow_seed": cfg.seed,
        "penalty": cfg.penalty,
        "tau": cfg.tau,
        "channels": list(cfg.channels),
        "kernel_width": cfg.kernel_width,
        "scaled_grad": cfg.scaled_grad,
        "warmup_epochs": cfg.warmup_epochs,
        "train": asdict(cfg.train),
        "holdout": "stratified 25% (fold 0 of 4)",
        "dataset": dataset.describe(),
        "has_ground_truth": ground_truth_mask is not None,
    }
    return _report("region-selection", config_echo, results, started)


# --------------------------------------------------------------------------
# verification lab
# --------------------------------------------------------------------------


def run_lab(n: int = 6, d: int = 6, seed: int = 0, penalty: float = 0.0,
            draws: int = 20_000) -> dict:
    """Random instance; compare the closed form against exact enumeration
    (when d allows) and Monte Carlo."""
    started = time.perf_counter()
    inst, w, p = reglab.ObjectiveInstance.random(n, d, seed)
    analytic = reglab.analytic_objective(inst, w, p, penalty)
    brute = None
    if d <= reglab.ENUMERATION_LIMIT:
        brute = reglab.brute_force_objective(inst, w, p, penalty)
    mc, stderr = reglab.monte_carlo_objective(
        inst, w, p, penalty, n_draws=draws, rng=RngStream(seed, 0xAC)
    )
    discrepancies = [abs(analytic - mc)]
    if brute is not None:
        discrepancies.append(abs(analytic - brute))
    results = {
        "analytic": analytic,
        "brute_force": brute,
        "monte_carlo": mc,
        "stderr": stderr,
        "max_discrepancy": max(discrepancies),
        "mc_within_4_stderr": bool(abs(analytic - mc) <= 4.0 * stderr + 1e-12),
    }
    config_echo = {"n": n, "d": d, "seed": seed, "penalty": penalty, "draws": draws}
    return _report("lab", config_echo, results, started)
