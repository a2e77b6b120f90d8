import json

import pytest
import yaml
from click.testing import CliRunner

from app.core.app_factory import create_app
from app.core.exceptions import NonFiniteLossException
from app.experiments.services import experiment_service
from tests.conftest import tiny_experiment_dict


@pytest.fixture
def app():
    return create_app()


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "tiny.yaml"
    path.write_text(yaml.safe_dump(tiny_experiment_dict(seeds=[1])), encoding="utf-8")
    return path


def _ok(result):
    assert result.exit_code == 0, result.stderr
    payload = json.loads(result.stdout.strip().splitlines()[-1])
    assert payload["status"] == 0
    return payload["data"]


def _failure(result, exit_code):
    assert result.exit_code == exit_code
    payload = json.loads(result.stderr.strip().splitlines()[-1])
    assert payload["status"] == exit_code
    return payload


def test_commands_are_registered(app):
    assert {"generate", "mismatch", "pretrain", "probe", "mil", "run", "sweep-alpha", "sweep-distance",
            "summarize"} == set(app.commands)


def test_generate_then_mismatch(app, runner, config_file, tmp_path):
    out = tmp_path / "ds"
    data = _ok(runner.invoke(app, ["generate", "--config", str(config_file), "--out", str(out)]))
    assert data["slides"] == {"train": 6, "val": 3, "test": 3}
    assert data["dataset_id"].startswith("syn-7-")

    report = _ok(runner.invoke(app, ["mismatch", "--dataset", str(out), "--distances", "1,2",
                                     "--within", "--out", str(tmp_path / "report")]))
    assert [row["d"] for row in report["rows"]] == [1, 2]
    assert (tmp_path / "report" / "mismatch.csv").exists()


def test_generate_seed_changes_dataset(app, runner, config_file, tmp_path):
    first = _ok(runner.invoke(app, ["generate", "--config", str(config_file), "--out", str(tmp_path / "a")]))
    second = _ok(runner.invoke(app, ["generate", "--config", str(config_file), "--seed", "8",
                                     "--out", str(tmp_path / "b")]))
    assert first["dataset_hash"] != second["dataset_hash"]


def test_run_then_summarize(app, runner, config_file, tmp_path):
    out = tmp_path / "out"
    data = _ok(runner.invoke(app, ["run", "--config", str(config_file), "--out", str(out)]))
    assert len(data["rows"]) == 1
    assert data["rows"][0]["d"] == "1"
    assert (out / "results.csv").exists()
    assert (out / "metrics" / "bt_context_a0.5_d1_s1.jsonl").exists()

    summary = _ok(runner.invoke(app, ["summarize", "--out", str(out)]))
    assert summary["rows"][0]["n_seeds"] == 1


def test_summarize_without_results(app, runner, tmp_path):
    _failure(runner.invoke(app, ["summarize", "--out", str(tmp_path)]), 3)


def test_pretrain_probe_mil(app, runner, config_file, tmp_path):
    encoder_dir = tmp_path / "encoder"
    trained = _ok(runner.invoke(app, ["pretrain", "--config", str(config_file), "--method", "vicreg",
                                      "--out", str(encoder_dir)]))
    assert (encoder_dir / "encoder.joblib").exists()
    assert len(trained["params_hash"]) > 0

    probe = _ok(runner.invoke(app, ["probe", "--config", str(config_file), "--params", str(encoder_dir),
                                    "--out", str(tmp_path / "probe")]))
    assert 0.0 <= probe["test_accuracy"] <= 1.0
    assert (tmp_path / "probe" / "probe_meta.json").exists()

    mil = _ok(runner.invoke(app, ["mil", "--config", str(config_file), "--params", str(encoder_dir)]))
    assert 0.0 <= mil["test_accuracy"] <= 1.0


def test_probe_untrained_and_supervised(app, runner, config_file):
    untrained = _ok(runner.invoke(app, ["probe", "--config", str(config_file)]))
    assert untrained["encoder"] == "untrained"
    supervised = _ok(runner.invoke(app, ["probe", "--config", str(config_file), "--supervised"]))
    assert supervised["encoder"] == "supervised"


def test_mil_requires_params(app, runner, config_file):
    _failure(runner.invoke(app, ["mil", "--config", str(config_file)]), 2)


@pytest.mark.parametrize("arguments", [
    ["--sampling", "standard", "--alpha", "0.5"],
    ["--distance", "0"],
    ["--distance", "far"],
])
def test_invalid_configuration_exits_2(app, runner, config_file, tmp_path, arguments):
    result = runner.invoke(app, ["run", "--config", str(config_file), "--out", str(tmp_path), *arguments])
    payload = _failure(result, 2)
    assert payload["details"]["code"] == "CONFIG"


def test_missing_config_file_exits_2(app, runner, tmp_path):
    _failure(runner.invoke(app, ["run", "--config", str(tmp_path / "nothing.yaml")]), 2)


def test_sweep_alpha_without_baseline_exits_2(app, runner, config_file, tmp_path):
    result = runner.invoke(app, ["sweep-alpha", "--config", str(config_file), "--alphas", "0.5,1",
                                 "--out", str(tmp_path)])
    _failure(result, 2)


def test_corrupted_dataset_exits_3(app, runner, config_file, tmp_path):
    out = tmp_path / "ds"
    _ok(runner.invoke(app, ["generate", "--config", str(config_file), "--out", str(out)]))
    slide_file = sorted(out.glob("slide_*.cssl"))[0]
    slide_file.write_bytes(b"NOPE" + slide_file.read_bytes()[4:])

    payload = _failure(runner.invoke(app, ["mismatch", "--dataset", str(out)]), 3)
    assert payload["details"]["code"] == "BAD_MAGIC"


def test_non_finite_loss_exits_4(app, runner, config_file, tmp_path, monkeypatch):
    def failing(dataset, config, on_epoch=None):
        raise NonFiniteLossException(step=1, method=config.loss.method.value, value=float("inf"))

    monkeypatch.setattr(experiment_service, "pretrain", failing)
    payload = _failure(runner.invoke(app, ["run", "--config", str(config_file), "--out", str(tmp_path)]), 4)
    assert payload["details"]["seed"] == 1
    assert payload["details"]["method"] == "bt"
