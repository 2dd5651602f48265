import json

import pandas as pd
import pytest
from click.testing import CliRunner

from cdpa_lab.exceptions import TrainingDivergedError
from cdpa_lab.main import cli
from cdpa_lab.models import TrainConfig


@pytest.fixture
def runner():
    return CliRunner()


def invoke(runner, *args):
    return runner.invoke(cli, [str(a) for a in args], catch_exceptions=False)


def test_help(runner):
    """Every command is listed"""
    result = invoke(runner, "--help")
    assert result.exit_code == 0
    for command in ("simulate", "train", "compare", "sweep"):
        assert command in result.output


def test_simulate_writes_traces(runner, experiment_file, tmp_path):
    """traces.csv has one row per sample plus the resolved config"""
    out = tmp_path / "out"
    result = invoke(runner, "simulate", "--config", experiment_file, "--out", out)
    assert result.exit_code == 0

    frame = pd.read_csv(out / "traces.csv")
    assert list(frame.columns) == ["time_s", "input_v", "output_v"]
    assert len(frame) == 100
    resolved = json.loads((out / "config.json").read_text())
    assert resolved["circuit"]["window_end"] == 0.003


def test_simulate_is_byte_identical(runner, experiment_file, tmp_path):
    """Two runs of the same config write the same bytes"""
    invoke(runner, "simulate", "--config", experiment_file, "--out", tmp_path / "a")
    invoke(runner, "simulate", "--config", experiment_file, "--out", tmp_path / "b")
    for name in ("traces.csv", "config.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_missing_config_exits_with_config_error(runner, tmp_path):
    """Exit code 2 and nothing written"""
    out = tmp_path / "out"
    result = invoke(runner, "simulate", "--config", tmp_path / "missing.cfg", "--out", out)
    assert result.exit_code == 2
    assert not out.exists()


def test_unknown_key_exits_with_config_error(runner, tmp_path):
    """Unknown keys are rejected before any work"""
    path = tmp_path / "bad.cfg"
    path.write_text("circuit.warp_factor = 9\n")
    out = tmp_path / "out"
    result = invoke(runner, "train", "--config", path, "--out", out)
    assert result.exit_code == 2
    assert not out.exists()


def test_negative_seed_is_rejected(runner, experiment_file, tmp_path):
    """--seed must be a valid train.seed"""
    result = invoke(runner, "train", "--config", experiment_file, "--out", tmp_path / "out", "--seed", -1)
    assert result.exit_code == 2


def test_train_ewnn(runner, experiment_file, tmp_path):
    """Training record and SSE curve"""
    out = tmp_path / "out"
    result = invoke(runner, "train", "--config", experiment_file, "--out", out, "--model", "ewnn")
    assert result.exit_code == 0

    record = json.loads((out / "train_ewnn.json").read_text())
    assert record["iterations_used"] == 5
    assert record["stop_reason"] == "max-iterations"
    assert record["final_model"]["hidden_count"] == 8
    curve = pd.read_csv(out / "sse_ewnn.csv")
    assert curve["sse"].tolist() == pytest.approx(record["sse_curve"])


def test_train_with_loose_threshold(runner, tmp_path):
    """A threshold above the first error stops after one iteration"""
    path = tmp_path / "loose.cfg"
    path.write_text("circuit.window_start = 0.002\ncircuit.window_end = 0.003\n"
                    "train.hidden_count = 4\ntrain.sse_threshold = 1e6\n")
    out = tmp_path / "out"
    result = invoke(runner, "train", "--config", path, "--out", out, "--model", "benn")
    assert result.exit_code == 0
    record = json.loads((out / "train_benn.json").read_text())
    assert record["iterations_used"] == 1
    assert record["stop_reason"] == "threshold-met"


def test_train_volterra(runner, experiment_file, tmp_path):
    """The Volterra-Laguerre fit reports its 55 coefficients"""
    out = tmp_path / "out"
    result = invoke(runner, "train", "--config", experiment_file, "--out", out, "--model", "volterra")
    assert result.exit_code == 0
    fit = json.loads((out / "train_volterra.json").read_text())
    assert fit["parameter_count"] == 55
    assert len(fit["coefficients"]) == 55


def test_training_divergence_exit_code(runner, experiment_file, tmp_path, monkeypatch):
    """A diverged run exits with 3"""
    def diverge(data, cfg):
        raise TrainingDivergedError(7)

    monkeypatch.setattr("cdpa_lab.main.train", diverge)
    result = invoke(runner, "train", "--config", experiment_file, "--out", tmp_path / "out")
    assert result.exit_code == 3


def test_compare(runner, experiment_file, tmp_path):
    """All three models are reported against the measured spectrum"""
    out = tmp_path / "out"
    result = invoke(runner, "compare", "--config", experiment_file, "--out", out)
    assert result.exit_code == 0

    report = json.loads((out / "comparison.json").read_text())
    names = [m["model"] for m in report["models"]]
    assert names == ["benn", "ewnn", "volterra"]
    for model in report["models"]:
        assert model["error"] is None
        assert set(model["spectrum_error_db"]) == {"f1", "f2", "f3", "f4", "f5", "f6", "f7"}
        assert (out / f"reconstructed_{model['model']}.csv").exists()
    assert report["models"][0]["iterations"] == 5
    assert (out / "spectrum_measured.csv").exists()


def test_sweep_hidden(runner, experiment_file, tmp_path):
    """One SSE curve per hidden size plus a selection"""
    out = tmp_path / "out"
    result = invoke(runner, "sweep", "--config", experiment_file, "--out", out, "--kind", "hidden", "--model", "benn")
    assert result.exit_code == 0
    assert (out / "sse_L005.csv").exists()
    assert (out / "sse_L010.csv").exists()

    summary = json.loads((out / "hidden_sweep.json").read_text())
    assert [row["hidden_count"] for row in summary] == [5, 10]
    selection = json.loads((out / "hidden_selection.json").read_text())
    assert selection["hidden_count"] in (5, 10)


def test_sweep_frequency(runner, experiment_file, tmp_path):
    """Asymmetry per input frequency"""
    out = tmp_path / "out"
    result = invoke(runner, "sweep", "--config", experiment_file, "--out", out, "--kind", "frequency")
    assert result.exit_code == 0
    frame = pd.read_csv(out / "asymmetry.csv")
    assert frame["input_freq"].tolist() == [3000.0, 3700.0]
    document = json.loads((out / "asymmetry.json").read_text())
    assert len(document["entries"]) == 2
    assert set(document["trend"]) == {"psimd2", "psimd3"}


def test_sweep_ab_updates(runner, experiment_file, tmp_path):
    """Curves with and without scale/translation updates"""
    out = tmp_path / "out"
    result = invoke(runner, "sweep", "--config", experiment_file, "--out", out, "--kind", "ab-updates")
    assert result.exit_code == 0
    assert len(pd.read_csv(out / "sse_ab_on.csv")) == 5
    assert len(pd.read_csv(out / "sse_ab_off.csv")) == 5
    summary = json.loads((out / "ab_updates.json").read_text())
    assert summary["iterations_on"] == summary["iterations_off"] == 5


def test_compare_records_invalid_model_config(runner, experiment_file, tmp_path, monkeypatch):
    """A model rejected by validation is recorded and the others still run"""
    def invalid(*args, **kwargs):
        TrainConfig(hidden_count=0)

    monkeypatch.setattr("cdpa_lab.main.fit_volterra_laguerre", invalid)
    out = tmp_path / "out"
    result = invoke(runner, "compare", "--config", experiment_file, "--out", out)
    assert result.exit_code == 0

    report = json.loads((out / "comparison.json").read_text())
    volterra = report["models"][2]
    assert volterra["model"] == "volterra"
    assert "hidden_count" in volterra["error"]
    assert report["models"][0]["error"] is None


def test_undefined_trend_is_written_as_null(runner, experiment_file, tmp_path, monkeypatch):
    """A NaN correlation becomes null so asymmetry.json stays valid JSON"""
    monkeypatch.setattr("cdpa_lab.main.asymmetry_trend",
                        lambda entries: {"psimd2": float("nan"), "psimd3": 0.5})
    out = tmp_path / "out"
    result = invoke(runner, "sweep", "--config", experiment_file, "--out", out, "--kind", "frequency")
    assert result.exit_code == 0

    text = (out / "asymmetry.json").read_text()
    assert "NaN" not in text
    assert json.loads(text)["trend"] == {"psimd2": None, "psimd3": 0.5}


def test_train_records_input_scale(runner, experiment_file, tmp_path):
    """The stored model carries the divisor applied to the stimulus"""
    out = tmp_path / "out"
    invoke(runner, "train", "--config", experiment_file, "--out", out, "--model", "benn")
    record = json.loads((out / "train_benn.json").read_text())
    assert record["final_model"]["input_scale"] == 100.0


@pytest.mark.parametrize("args, names", [
    (("train", "--model", "ewnn"), ("train_ewnn.json", "sse_ewnn.csv", "config.json")),
    (("compare",), ("comparison.json", "reconstructed_benn.csv", "reconstructed_ewnn.csv",
                    "reconstructed_volterra.csv", "spectrum_measured.csv")),
    (("sweep", "--kind", "hidden", "--model", "ewnn"), ("hidden_sweep.json", "hidden_selection.json",
                                                        "sse_L004.csv", "sse_L008.csv")),
    (("sweep", "--kind", "frequency"), ("asymmetry.csv", "asymmetry.json")),
    (("sweep", "--kind", "ab-updates"), ("ab_updates.json", "sse_ab_on.csv", "sse_ab_off.csv")),
])
def test_reruns_are_byte_identical(runner, experiment_file, tmp_path, args, names):
    """Every artifact of a rerun matches the first run byte for byte"""
    command, *rest = args
    invoke(runner, command, "--config", experiment_file, "--out", tmp_path / "a", *rest)
    invoke(runner, command, "--config", experiment_file, "--out", tmp_path / "b", *rest)
    for name in names:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes(), name
