"""HTTP facade over the pipeline workflows."""

import time

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..exceptions import BsfError, ConfigError
from ..net import dump_network, parse_network
from ..pipeline import (
    Dataset,
    PruneConfig,
    RegionConfig,
    SelectConfig,
    TrainSpec,
    dataset_to_csv,
    make_informative_classification,
    make_synthetic_spectra,
    parse_csv_text,
    run_feature_selection,
    run_lab,
    run_pruning_experiment,
    run_region_selection,
)
from ..pipeline.experiments import SCHEMA_VERSION
from ..pruning import prune
from . import schemas


def _train_spec(settings: schemas.TrainSettings) -> TrainSpec:
    return TrainSpec(**settings.model_dump())


def _informative(spec: schemas.InformativeSpec, fallback_seed: int):
    seed = fallback_seed if spec.seed is None else spec.seed
    return make_informative_classification(
        n_samples=spec.n_samples,
        n_features=spec.n_features,
        n_informative=spec.n_informative,
        class_sep=spec.class_sep,
        interaction=spec.interaction,
        seed=seed,
    )


def _spectra(spec: schemas.SpectraSpec, fallback_seed: int):
    seed = fallback_seed if spec.seed is None else spec.seed
    return make_synthetic_spectra(
        n_samples=spec.n_samples,
        length=spec.length,
        n_classes=spec.n_classes,
        peaks_per_class=spec.peaks_per_class,
        peak_sigma=spec.peak_sigma,
        noise=spec.noise,
        n_shared_peaks=spec.n_shared_peaks,
        seed=seed,
    )


def _dataset_from(payload: schemas.DataPayload) -> Dataset:
    return parse_csv_text(
        payload.csv_text,
        label_column=payload.label_column,
        delimiter=payload.delimiter,
    )


def create_app() -> FastAPI:
    app = FastAPI(title="bsf service", version=__version__)

    @app.exception_handler(BsfError)
    async def _bsf_error(_: Request, exc: BsfError):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.get("/health", response_model=schemas.HealthResponse)
    def health():
        return schemas.HealthResponse(status="ok", version=__version__)

    @app.post("/api/select", response_model=schemas.Report)
    def select(req: schemas.SelectRequest):
        if req.synth is not None:
            dataset, truth = _informative(req.synth, req.seed)
            ground_truth = truth["informative_indices"]
        else:
            dataset, ground_truth = _dataset_from(req.data), None
        cfg = SelectConfig(
            penalty=req.penalty,
            folds=req.folds,
            tau=req.tau,
            hidden=req.hidden,
            scaled_grad=req.scaled_grad,
            seed=req.seed,
            metric_drop_tolerance=req.metric_drop_tolerance,
            train=_train_spec(req.train),
        )
        return run_feature_selection(dataset, cfg, ground_truth=ground_truth)

    @app.post("/api/prune", response_model=schemas.Report)
    def prune_experiment(req: schemas.PruneExperimentRequest):
        if req.synth is not None:
            dataset, _ = _informative(req.synth, req.seed)
        else:
            dataset = _dataset_from(req.data)
        cfg = PruneConfig(
            penalty=req.penalty,
            tau=req.tau,
            hidden=req.hidden,
            scaled_grad=req.scaled_grad,
            seed=req.seed,
            warmup_epochs=req.warmup_epochs,
            train=_train_spec(req.train),
        )
        return run_pruning_experiment(dataset, cfg)

    @app.post("/api/prune/checkpoint", response_model=schemas.CheckpointPruneResponse)
    def prune_checkpoint(req: schemas.CheckpointPruneRequest):
        started = time.perf_counter()
        net = parse_network(req.checkpoint)
        if req.tau is not None:
            for _, gate in net.gates():
                gate.tau = req.tau
        pruned, report = prune(net)
        envelope = {
            "schema_version": SCHEMA_VERSION,
            "workflow": "prune-checkpoint",
            "config": {"tau_override": req.tau},
            "results": report.to_dict(),
            "timing": {"wall_time_s": time.perf_counter() - started},
        }
        return schemas.CheckpointPruneResponse(
            checkpoint=dump_network(pruned), report=schemas.Report(**envelope)
        )

    @app.post("/api/regions", response_model=schemas.Report)
    def regions(req: schemas.RegionRequest):
        if req.synth is not None:
            dataset, truth = _spectra(req.synth, req.seed)
            mask = truth["region_mask"]
        else:
            dataset, mask = _dataset_from(req.data), req.ground_truth_mask
        cfg = RegionConfig(
            penalty=req.penalty,
            tau=req.tau,
            channels=req.channels,
            kernel_width=req.kernel_width,
            scaled_grad=req.scaled_grad,
            seed=req.seed,
            warmup_epochs=req.warmup_epochs,
            train=_train_spec(req.train),
        )
        return run_region_selection(dataset, cfg, ground_truth_mask=mask)

    @app.post("/api/lab", response_model=schemas.Report)
    def lab(req: schemas.LabRequest):
        return run_lab(n=req.n, d=req.d, seed=req.seed,
                       penalty=req.penalty, draws=req.draws)

    @app.post("/api/synth", response_model=schemas.SynthResponse)
    def synth(req: schemas.SynthRequest):
        started = time.perf_counter()
        if req.kind == "informative":
            spec = req.informative or schemas.InformativeSpec()
            dataset, truth = _informative(spec, req.seed)
            config = spec.model_dump() | {"kind": req.kind, "seed": req.seed}
        elif req.kind == "spectra":
            spec = req.spectra or schemas.SpectraSpec()
            dataset, truth = _spectra(spec, req.seed)
            config = spec.model_dump() | {"kind": req.kind, "seed": req.seed}
        else:
            raise ConfigError(f"unknown synth kind {req.kind!r}")
        envelope = {
            "schema_version": SCHEMA_VERSION,
            "workflow": "synth",
            "config": config,
            "results": {"ground_truth": truth, "dataset": dataset.describe()},
            "timing": {"wall_time_s": time.perf_counter() - started},
        }
        return schemas.SynthResponse(
            csv_text=dataset_to_csv(dataset), report=schemas.Report(**envelope)
        )

    return app


app = create_app()
