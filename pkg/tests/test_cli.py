"""Command-line client: config merging, report/CSV writing, exit codes.

Every test drives ``main(argv)`` in-process; no subprocesses, no network.
"""

import json

import numpy as np
import pytest

from bsf.cli import _parse_penalty, _write_plot_data, main
from bsf.core import RngStream
from bsf.exceptions import ConfigError
from bsf.gating import BsfGate
from bsf.net import Dense, Network, Relu
from bsf.net.checkpoint import load_network, save_network
from bsf.pipeline import dataset_to_csv, make_informative_classification
from bsf.pruning import prune

SELECT_CFG = """\
[select]
penalty = 0.01
folds = 2
seed = 0

[train]
max_epochs = 6
patience = 2

[synth]
kind = informative
n_samples = 80
n_features = 5
n_informative = 2
class_sep = 4.0
seed = 1
"""

REGIONS_CFG = """\
[regions]
penalty = 0.005
channels = 4
kernel_width = 3
warmup_epochs = 2
seed = 0

[train]
max_epochs = 5
patience = 2

[synth]
kind = spectra
n_samples = 60
length = 32
noise = 0.05
seed = 2
"""

PRUNE_CFG = """\
[prune]
penalty = 0.01
hidden = 8
warmup_epochs = 2
seed = 0

[train]
max_epochs = 5
patience = 2

[synth]
kind = informative
n_samples = 80
n_features = 5
n_informative = 2
class_sep = 4.0
seed = 1
"""


@pytest.fixture(scope="module")
def select_run(tmp_path_factory):
    base = tmp_path_factory.mktemp("select")
    cfg = base / "bsf.ini"
    cfg.write_text(SELECT_CFG, encoding="utf-8")
    out = base / "report.json"
    plot = base / "plot.csv"
    code = main(["select", "--synth", "--config", str(cfg),
                 "--out", str(out), "--plot-data", str(plot)])
    return code, cfg, out, plot


@pytest.fixture(scope="module")
def regions_run(tmp_path_factory):
    base = tmp_path_factory.mktemp("regions")
    cfg = base / "bsf.ini"
    cfg.write_text(REGIONS_CFG, encoding="utf-8")
    out = base / "report.json"
    plot = base / "plot.csv"
    code = main(["regions", "--synth", "--config", str(cfg),
                 "--out", str(out), "--plot-data", str(plot)])
    return code, cfg, out, plot


def test_select_writes_report_with_config_echo(select_run):
    code, _, out, _ = select_run
    assert code == 0
    report = json.loads(out.read_text(encoding="utf-8"))
    assert report["workflow"] == "feature-selection"
    assert report["schema_version"] == 1
    assert report["config"]["folds"] == 2
    assert report["config"]["workflow_seed"] == 0
    assert report["config"]["train"]["max_epochs"] == 6
    assert report["config"]["dataset"]["rows"] == 80


def test_report_file_is_sorted_indented_json(select_run):
    _, _, out, _ = select_run
    text = out.read_text(encoding="utf-8")
    assert text == json.dumps(json.loads(text), sort_keys=True, indent=2) + "\n"


def test_plot_csv_matches_report_plot_data(select_run):
    _, _, out, plot = select_run
    report = json.loads(out.read_text(encoding="utf-8"))
    lines = plot.read_text(encoding="utf-8").splitlines()
    plot_data = report["results"]["plot_data"]
    assert lines[0].split(",") == plot_data["columns"]
    assert len(lines) - 1 == len(plot_data["rows"])
    first = lines[1].split(",")
    # repr round-trips floats, so the CSV loses nothing
    assert [float(v) for v in first] == [float(v) for v in plot_data["rows"][0]]


def test_rerun_is_identical_excluding_timing(select_run, tmp_path):
    _, cfg, out, _ = select_run
    again = tmp_path / "again.json"
    assert main(["select", "--synth", "--config", str(cfg),
                 "--out", str(again)]) == 0
    a = json.loads(out.read_text(encoding="utf-8"))
    b = json.loads(again.read_text(encoding="utf-8"))
    a.pop("timing")
    b.pop("timing")
    assert a == b


def test_seed_flag_overrides_config(select_run, tmp_path):
    _, cfg, _, _ = select_run
    out = tmp_path / "seeded.json"
    assert main(["select", "--synth", "--config", str(cfg),
                 "--seed", "7", "--out", str(out)]) == 0
    report = json.loads(out.read_text(encoding="utf-8"))
    assert report["config"]["workflow_seed"] == 7


def test_lambda_flag_overrides_config_penalty(select_run, tmp_path):
    _, cfg, _, _ = select_run
    out = tmp_path / "lam.json"
    assert main(["select", "--synth", "--config", str(cfg),
                 "--lambda", "0.001,0.1", "--out", str(out)]) == 0
    report = json.loads(out.read_text(encoding="utf-8"))
    assert report["config"]["penalties"] == [0.001, 0.1]


def test_select_reads_csv_file(tmp_path):
    dataset, _ = make_informative_classification(
        80, 5, 2, class_sep=4.0, seed=1)
    data = tmp_path / "data.csv"
    data.write_text(dataset_to_csv(dataset), encoding="utf-8")
    cfg = tmp_path / "bsf.ini"
    cfg.write_text("[train]\nmax_epochs = 6\npatience = 2\n", encoding="utf-8")
    out = tmp_path / "report.json"
    code = main(["select", "--data", str(data), "--config", str(cfg),
                 "--lambda", "0.01", "--folds", "2", "--seed", "0",
                 "--out", str(out)])
    assert code == 0
    report = json.loads(out.read_text(encoding="utf-8"))
    assert report["config"]["dataset"]["features"] == 5
    assert report["config"]["ground_truth_features"] is None


def test_regions_cli_run(regions_run):
    code, _, out, plot = regions_run
    assert code == 0
    report = json.loads(out.read_text(encoding="utf-8"))
    assert report["workflow"] == "region-selection"
    # config-file keys that have no dedicated flag still reach the workflow
    assert report["config"]["warmup_epochs"] == 2
    assert report["config"]["channels"] == [4]
    assert len(report["results"]["gate_values"]) == 32
    lines = plot.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "position,gate_value,selected"
    assert len(lines) == 1 + 32


def test_prune_sweep_cli(tmp_path):
    cfg = tmp_path / "bsf.ini"
    cfg.write_text(PRUNE_CFG, encoding="utf-8")
    out = tmp_path / "report.json"
    code = main(["prune", "--synth", "--config", str(cfg), "--out", str(out)])
    assert code == 0
    report = json.loads(out.read_text(encoding="utf-8"))
    assert report["workflow"] == "pruning"
    assert report["config"]["warmup_epochs"] == 2
    assert report["config"]["hidden"] == [8]
    assert [p["penalty"] for p in report["results"]["points"]] == [0.01]


def test_prune_checkpoint_round_trip(tmp_path):
    net = Network((3,), [Dense(3, 4), Relu(), BsfGate(n_gates=4),
                         Dense(4, 2)]).initialize(RngStream(0))
    net.layers[2].p[:] = np.array([0.9, 0.1, 0.8, 0.0])
    source = tmp_path / "net.json"
    save_network(net, str(source))
    pruned_path = tmp_path / "pruned.json"
    out = tmp_path / "report.json"
    code = main(["prune", "--checkpoint", str(source),
                 "--out-checkpoint", str(pruned_path), "--out", str(out)])
    assert code == 0
    pruned = load_network(str(pruned_path))
    expected, _ = prune(net)
    x = np.random.default_rng(5).normal(size=(40, 3))
    assert np.array_equal(pruned.predict(x), expected.predict(x))
    report = json.loads(out.read_text(encoding="utf-8"))
    assert report["workflow"] == "prune-checkpoint"
    assert report["results"]["pruned_parameters"] == 14


def test_prune_checkpoint_needs_out_checkpoint(tmp_path, capsys):
    net = Network((3,), [Dense(3, 4), Relu(), BsfGate(n_gates=4),
                         Dense(4, 2)]).initialize(RngStream(0))
    source = tmp_path / "net.json"
    save_network(net, str(source))
    assert main(["prune", "--checkpoint", str(source)]) == 2
    assert "error:" in capsys.readouterr().err


def test_lab_cli_writes_to_stdout(capsys):
    assert main(["lab", "--n", "5", "--d", "5", "--seed", "3"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["workflow"] == "lab"
    res = report["results"]
    assert res["brute_force"] == pytest.approx(res["analytic"], abs=1e-10)
    assert res["mc_within_4_stderr"] is True


def test_lab_cli_reads_config_section(tmp_path):
    cfg = tmp_path / "bsf.ini"
    cfg.write_text("[lab]\nn = 5\nd = 4\nseed = 2\npenalty = 0.1\n"
                   "draws = 2000\n", encoding="utf-8")
    out = tmp_path / "report.json"
    assert main(["lab", "--config", str(cfg), "--out", str(out)]) == 0
    report = json.loads(out.read_text(encoding="utf-8"))
    assert report["config"] == {"n": 5, "d": 4, "seed": 2,
                                "penalty": 0.1, "draws": 2000}


def test_synth_informative_cli(tmp_path):
    data = tmp_path / "data.csv"
    out = tmp_path / "report.json"
    code = main(["synth", "--kind", "informative", "--seed", "5",
                 "--data-out", str(data), "--out", str(out)])
    assert code == 0
    report = json.loads(out.read_text(encoding="utf-8"))
    assert report["workflow"] == "synth"
    truth = report["results"]["ground_truth"]["informative_indices"]
    assert truth == sorted(truth)
    # the CSV is a loadable dataset with the advertised shape
    desc = report["results"]["dataset"]
    header = data.read_text(encoding="utf-8").splitlines()[0]
    assert len(header.split(",")) == desc["features"] + 1
    rows = data.read_text(encoding="utf-8").splitlines()[1:]
    assert len(rows) == desc["rows"]


def test_synth_spectra_cli_uses_config(tmp_path):
    cfg = tmp_path / "bsf.ini"
    cfg.write_text("[synth]\nkind = spectra\nn_samples = 20\nlength = 32\n"
                   "seed = 3\n", encoding="utf-8")
    data = tmp_path / "spectra.csv"
    out = tmp_path / "report.json"
    assert main(["synth", "--config", str(cfg), "--data-out", str(data),
                 "--out", str(out)]) == 0
    report = json.loads(out.read_text(encoding="utf-8"))
    assert report["config"]["kind"] == "spectra"
    assert len(report["results"]["ground_truth"]["region_mask"]) == 32
    assert report["results"]["dataset"]["features"] == 32


def test_select_requires_a_data_source(capsys):
    assert main(["select"]) == 2
    assert "select needs --data or --synth" in capsys.readouterr().err


def test_missing_data_file_exits_2(tmp_path, capsys):
    assert main(["select", "--data", str(tmp_path / "nope.csv")]) == 2
    assert "error:" in capsys.readouterr().err


def test_unknown_config_key_exits_2(tmp_path, capsys):
    cfg = tmp_path / "bsf.ini"
    cfg.write_text("[select]\nbogus = 1\n", encoding="utf-8")
    assert main(["select", "--synth", "--config", str(cfg)]) == 2
    assert "bogus" in capsys.readouterr().err


def test_synth_kind_mismatch_exits_2(tmp_path, capsys):
    cfg = tmp_path / "bsf.ini"
    cfg.write_text("[synth]\nkind = spectra\n", encoding="utf-8")
    assert main(["select", "--synth", "--config", str(cfg)]) == 2
    assert "kind = informative" in capsys.readouterr().err


def test_service_error_surfaces_with_status(tmp_path, capsys):
    cfg = tmp_path / "bsf.ini"
    cfg.write_text("[synth]\nkind = informative\nn_samples = 40\n"
                   "n_features = 4\nn_informative = 10\n", encoding="utf-8")
    assert main(["select", "--synth", "--config", str(cfg)]) == 2
    assert "service error (400)" in capsys.readouterr().err


def test_parse_penalty_forms():
    assert _parse_penalty("grid") == "grid"
    assert _parse_penalty("0.5") == 0.5
    assert _parse_penalty("0.1,1") == [0.1, 1.0]
    with pytest.raises(ConfigError):
        _parse_penalty(",")


def test_plot_data_requires_plot_payload(tmp_path):
    with pytest.raises(ConfigError):
        _write_plot_data({"results": {}}, str(tmp_path / "plot.csv"))
