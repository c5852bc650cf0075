"""Command-line client for the workflows.

Every subcommand builds a request, sends it to the service, and writes the
returned report. By default the service runs in-process (no network, no
daemon); ``--server http://host:port`` targets a running instance instead,
so the same invocations scale from a laptop to a shared box.
"""

import argparse
import asyncio
import csv
import json
import sys

import httpx

from .exceptions import BsfError, ConfigError
from .pipeline import load_config

_TRAIN_KEYS = ("optimizer", "learning_rate", "batch_size", "max_epochs",
               "patience", "val_fraction")


async def _post_in_process(path: str, payload: dict) -> httpx.Response:
    from .service.app import create_app

    transport = httpx.ASGITransport(app=create_app())
    async with httpx.AsyncClient(
        transport=transport, base_url="http://bsf.internal", timeout=None
    ) as client:
        return await client.post(path, json=payload)


def _post(server: str | None, path: str, payload: dict) -> dict:
    if server:
        with httpx.Client(base_url=server, timeout=None) as client:
            response = client.post(path, json=payload)
    else:
        response = asyncio.run(_post_in_process(path, payload))
    if response.status_code != 200:
        try:
            detail = response.json().get("detail", response.text)
        except ValueError:
            detail = response.text
        raise BsfError(f"service error ({response.status_code}): {detail}")
    return response.json()


def _write_report(report: dict, path: str | None):
    text = json.dumps(report, sort_keys=True, indent=2) + "\n"
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _write_plot_data(report: dict, path: str | None):
    if not path:
        return
    plot = report.get("results", {}).get("plot_data")
    if not plot:
        raise ConfigError("this workflow produces no plot data")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(plot["columns"])
        writer.writerows(plot["rows"])


def _parse_penalty(text: str):
    if text == "grid":
        return "grid"
    values = [float(v) for v in text.split(",") if v.strip()]
    if not values:
        raise ConfigError("empty --lambda value")
    return values[0] if len(values) == 1 else values


def _read_data_payload(args) -> dict:
    with open(args.data, encoding="utf-8") as fh:
        csv_text = fh.read()
    return {"csv_text": csv_text, "label_column": args.label_col,
            "delimiter": args.delimiter}


def _config_sections(args) -> dict:
    return load_config(args.config) if args.config else {}


def _merge(base: dict, flags: dict) -> dict:
    """Config-file values first, explicit CLI flags win."""
    merged = dict(base)
    merged.update({k: v for k, v in flags.items() if v is not None})
    return merged


def _train_settings(sections: dict) -> dict | None:
    section = sections.get("train")
    if not section:
        return None
    return {k: v for k, v in section.items() if k in _TRAIN_KEYS}


def _add_common(sub, with_folds=False):
    sub.add_argument("--data", help="CSV file with a label column")
    sub.add_argument("--label-col", default="label")
    sub.add_argument("--delimiter", default=",")
    sub.add_argument("--synth", action="store_true",
                     help="use a synthetic dataset ([synth] config section or defaults)")
    sub.add_argument("--config", help="INI config file")
    sub.add_argument("--seed", type=int, default=None)
    sub.add_argument("--lambda", dest="penalty", default=None,
                     help="penalty: a number, comma list, or 'grid'")
    sub.add_argument("--tau", type=float, default=None)
    if with_folds:
        sub.add_argument("--folds", type=int, default=None)
    sub.add_argument("--out", help="report JSON path (default: stdout)")
    sub.add_argument("--plot-data", help="plot-ready CSV path")


def _synth_informative(sections: dict, seed: int | None) -> dict:
    section = dict(sections.get("synth", {}))
    if section.pop("kind", "informative") != "informative":
        raise ConfigError("this workflow expects [synth] kind = informative")
    section.pop("seed", None) if seed is None else section.update(seed=seed)
    allowed = {"n_samples", "n_features", "n_informative", "class_sep",
               "interaction", "seed"}
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"[synth] keys not valid for informative data: {sorted(unknown)}")
    return section


def _synth_spectra(sections: dict, seed: int | None) -> dict:
    section = dict(sections.get("synth", {}))
    if section.pop("kind", "spectra") != "spectra":
        raise ConfigError("this workflow expects [synth] kind = spectra")
    section.pop("seed", None) if seed is None else section.update(seed=seed)
    allowed = {"n_samples", "length", "n_classes", "peaks_per_class",
               "peak_sigma", "noise", "n_shared_peaks", "seed"}
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"[synth] keys not valid for spectra: {sorted(unknown)}")
    return section


def _cmd_select(args) -> int:
    sections = _config_sections(args)
    flags = {
        "penalty": _parse_penalty(args.penalty) if args.penalty else None,
        "folds": args.folds,
        "tau": args.tau,
        "seed": args.seed,
    }
    payload = _merge(sections.get("select", {}), flags)
    train = _train_settings(sections)
    if train:
        payload["train"] = train
    if args.data:
        payload["data"] = _read_data_payload(args)
    elif args.synth:
        payload["synth"] = _synth_informative(sections, None)
    else:
        raise ConfigError("select needs --data or --synth")
    report = _post(args.server, "/api/select", payload)
    _write_report(report, args.out)
    _write_plot_data(report, args.plot_data)
    return 0


def _cmd_prune(args) -> int:
    if args.checkpoint:
        with open(args.checkpoint, encoding="utf-8") as fh:
            payload = {"checkpoint": fh.read(), "tau": args.tau}
        response = _post(args.server, "/api/prune/checkpoint", payload)
        if not args.out_checkpoint:
            raise ConfigError("checkpoint pruning needs --out-checkpoint")
        with open(args.out_checkpoint, "w", encoding="utf-8") as fh:
            fh.write(response["checkpoint"])
            fh.write("\n")
        _write_report(response["report"], args.out)
        return 0

    sections = _config_sections(args)
    flags = {
        "penalty": _parse_penalty(args.penalty) if args.penalty else None,
        "tau": args.tau,
        "seed": args.seed,
    }
    payload = _merge(sections.get("prune", {}), flags)
    train = _train_settings(sections)
    if train:
        payload["train"] = train
    if args.data:
        payload["data"] = _read_data_payload(args)
    elif args.synth:
        payload["synth"] = _synth_informative(sections, None)
    else:
        raise ConfigError("prune needs --checkpoint, --data, or --synth")
    report = _post(args.server, "/api/prune", payload)
    _write_report(report, args.out)
    _write_plot_data(report, args.plot_data)
    return 0


def _cmd_regions(args) -> int:
    sections = _config_sections(args)
    flags = {
        "penalty": float(args.penalty) if args.penalty else None,
        "tau": args.tau,
        "seed": args.seed,
    }
    payload = _merge(sections.get("regions", {}), flags)
    train = _train_settings(sections)
    if train:
        payload["train"] = train
    if args.data:
        payload["data"] = _read_data_payload(args)
    elif args.synth:
        payload["synth"] = _synth_spectra(sections, None)
    else:
        raise ConfigError("regions needs --data or --synth")
    report = _post(args.server, "/api/regions", payload)
    _write_report(report, args.out)
    _write_plot_data(report, args.plot_data)
    return 0


def _cmd_lab(args) -> int:
    sections = _config_sections(args)
    flags = {
        "n": args.n,
        "d": args.d,
        "seed": args.seed,
        "penalty": float(args.penalty) if args.penalty else None,
        "draws": args.draws,
    }
    payload = _merge(sections.get("lab", {}), flags)
    report = _post(args.server, "/api/lab", payload)
    _write_report(report, args.out)
    return 0


def _cmd_synth(args) -> int:
    sections = _config_sections(args)
    section = sections.get("synth", {})
    kind = args.kind or section.get("kind")
    if kind not in ("informative", "spectra"):
        raise ConfigError("synth needs --kind informative|spectra (or [synth] kind)")
    payload: dict = {"kind": kind}
    if args.seed is not None:
        payload["seed"] = args.seed
    if kind == "informative":
        payload["informative"] = _synth_informative(sections, args.seed)
    else:
        payload["spectra"] = _synth_spectra(sections, args.seed)
    response = _post(args.server, "/api/synth", payload)
    with open(args.data_out, "w", encoding="utf-8") as fh:
        fh.write(response["csv_text"])
    _write_report(response["report"], args.out)
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service.app import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bsf",
        description="Stochastic-gate feature selection, pruning, and region selection.",
    )
    parser.add_argument("--server", default=None,
                        help="service URL; omit to run in-process")
    commands = parser.add_subparsers(dest="command", required=True)

    select = commands.add_parser("select", help="feature selection workflow")
    _add_common(select, with_folds=True)
    select.set_defaults(func=_cmd_select)

    prune_cmd = commands.add_parser(
        "prune", help="pruning sweep (--data/--synth) or checkpoint pruning (--checkpoint)"
    )
    _add_common(prune_cmd)
    prune_cmd.add_argument("--checkpoint", help="saved network to prune structurally")
    prune_cmd.add_argument("--out-checkpoint", help="where to write the pruned network")
    prune_cmd.set_defaults(func=_cmd_prune)

    regions = commands.add_parser("regions", help="spectral region selection workflow")
    _add_common(regions)
    regions.set_defaults(func=_cmd_regions)

    lab = commands.add_parser("lab", help="expected-objective verification lab")
    lab.add_argument("--n", type=int, default=None)
    lab.add_argument("--d", type=int, default=None)
    lab.add_argument("--seed", type=int, default=None)
    lab.add_argument("--lambda", dest="penalty", default=None)
    lab.add_argument("--draws", type=int, default=None)
    lab.add_argument("--config", help="INI config file")
    lab.add_argument("--out", help="report JSON path (default: stdout)")
    lab.set_defaults(func=_cmd_lab)

    synth = commands.add_parser("synth", help="generate a synthetic dataset CSV")
    synth.add_argument("--kind", choices=["informative", "spectra"])
    synth.add_argument("--seed", type=int, default=None)
    synth.add_argument("--config", help="INI config file")
    synth.add_argument("--data-out", required=True, help="dataset CSV path")
    synth.add_argument("--out", help="report JSON path with ground truth (default: stdout)")
    synth.set_defaults(func=_cmd_synth)

    serve = commands.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    serve.set_defaults(func=_cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BsfError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
