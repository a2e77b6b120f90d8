import json
from pathlib import Path

import numpy as np
import pandas as pd
import pytest
import yaml
from pydantic import ValidationError

from app.core.exceptions import ConfigException, NoQualifyingSlidesException, NonFiniteLossException
from app.experiments.schema.schemas import NO_DISTANCE, ExperimentConfig, ExperimentResult
from app.experiments.services import experiment_service
from app.experiments.services.config_loader import load_experiment_config
from app.experiments.services.experiment_service import (
    METRIC_COLUMNS,
    mismatch_report,
    result_records,
    run_experiment,
    summarize_results,
    sweep_alpha,
    sweep_distance,
)
from app.experiments.services.results_writer import (
    ResultsWriter,
    read_results,
    read_results_frame,
    results_frame,
)
from app.sampler.models.sampling import SamplingMode
from app.slidegen.models.slide import SlideDataset
from app.ssl.schema.schemas import SSLMethod
from tests.conftest import tiny_experiment_dict


def _config(**changes) -> ExperimentConfig:
    return ExperimentConfig(**tiny_experiment_dict(**changes))


# ===== 설정 =====

def test_default_alpha_depends_on_sampling():
    assert _config(sampling="context").alpha == 0.5
    assert _config(sampling="standard").alpha == 0.0


def test_standard_rejects_alpha():
    with pytest.raises(ValidationError):
        _config(sampling="standard", alpha=0.3)


def test_standard_rejects_unbounded_distance():
    with pytest.raises(ValidationError):
        _config(sampling="standard", distance="inf")


@pytest.mark.parametrize("distance", [0, -2, "zero", True])
def test_distance_must_be_positive(distance):
    with pytest.raises(ValidationError):
        _config(distance=distance)


def test_distance_labels():
    assert _config(sampling="standard").distance_label == NO_DISTANCE
    assert _config(distance=4).distance_label == "4"
    unbounded = _config(distance="INF")
    assert unbounded.distance_cap is None
    assert unbounded.distance_label == "inf"


def test_train_config_carries_run_fields():
    config = _config(method="vicreg", alpha=0.25, distance=2)
    train = config.train_config(9)
    assert train.seed == 9
    assert train.loss.method == SSLMethod.VICREG
    assert train.loss.alpha == 0.25
    assert train.sampler.mode == SamplingMode.CONTEXT
    assert train.sampler.distance_cap == 2


def test_load_config_from_yaml_with_overrides(tmp_path):
    path = tmp_path / "exp.yaml"
    path.write_text(yaml.safe_dump(tiny_experiment_dict(method="byol", distance=2)), encoding="utf-8")
    config = load_experiment_config(path, {"seed": 5, "alpha": 0.75, "method": None})
    assert config.method == SSLMethod.BYOL
    assert config.seeds == [5]
    assert config.alpha == 0.75
    assert config.distance == 2


def test_load_config_errors(tmp_path):
    bad_yaml = tmp_path / "bad.yaml"
    bad_yaml.write_text("gen: [unclosed", encoding="utf-8")
    not_mapping = tmp_path / "list.yaml"
    not_mapping.write_text("- 1\n- 2\n", encoding="utf-8")

    for path in (bad_yaml, not_mapping, tmp_path / "missing.yaml"):
        with pytest.raises(ConfigException):
            load_experiment_config(path)
    with pytest.raises(ConfigException) as exc_info:
        load_experiment_config(None, {"sampling": "standard", "alpha": 0.5})
    assert exc_info.value.exit_code == 2
    with pytest.raises(ConfigException):
        load_experiment_config(None, {"epochs": 3})


# ===== 실행 =====

def _metrics(results):
    return [[getattr(r, column) for column in METRIC_COLUMNS] for r in results]


def test_run_experiment_one_row_per_seed(tiny_dataset, tmp_path):
    config = _config()
    results = run_experiment(config, tiny_dataset, metrics_dir=tmp_path / "metrics", n_jobs=1)
    assert [r.seed for r in results] == [1, 2]
    assert all(r.dataset_id == tiny_dataset.dataset_id for r in results)
    assert all(r.d == "1" and r.alpha == 0.5 for r in results)

    stream = tmp_path / "metrics" / "bt_context_a0.5_d1_s1.jsonl"
    lines = [json.loads(line) for line in stream.read_text(encoding="utf-8").splitlines()]
    assert [line["epoch"] for line in lines] == [1, 2]


def test_run_experiment_is_deterministic_across_workers(tiny_dataset):
    config = _config()
    serial = run_experiment(config, tiny_dataset, n_jobs=1)
    threaded = run_experiment(config, tiny_dataset, n_jobs=2)
    assert _metrics(serial) == _metrics(threaded)


def test_writer_skips_duplicates_unless_forced(tiny_dataset, tmp_path):
    path = tmp_path / "results.csv"
    results = run_experiment(_config(seeds=[1]), tiny_dataset, n_jobs=1)

    assert ResultsWriter(path).append(results) == 1
    assert ResultsWriter(path).append(results) == 0
    assert ResultsWriter(path, force=True).append(results) == 1
    assert len(read_results_frame(path)) == 1

    parsed = read_results(path)
    assert isinstance(parsed[0], ExperimentResult)
    assert parsed[0].d == "1"
    assert _metrics(parsed) == _metrics(results)


def test_standard_rows_use_placeholder_distance(tiny_dataset, tmp_path):
    path = tmp_path / "results.csv"
    run_experiment(_config(sampling="standard", seeds=[1]), tiny_dataset, ResultsWriter(path), n_jobs=1)
    assert read_results(path)[0].d == NO_DISTANCE


def test_failure_names_the_run(tiny_dataset, monkeypatch):
    def failing(dataset, config, on_epoch=None):
        raise NonFiniteLossException(step=3, method=config.loss.method.value, value=float("nan"))

    monkeypatch.setattr(experiment_service, "pretrain", failing)
    with pytest.raises(NonFiniteLossException) as exc_info:
        run_experiment(_config(method="vicreg", seeds=[4]), tiny_dataset, n_jobs=1)
    details = exc_info.value.details
    assert details["seed"] == 4
    assert details["method"] == "vicreg"
    assert details["sampling"] == "context"
    assert details["step"] == 3


def test_sweep_alpha_requires_baseline(tiny_dataset):
    with pytest.raises(ConfigException):
        sweep_alpha(_config(), alphas=[0.5, 1.0], dataset=tiny_dataset)


def test_sweep_alpha_rows_and_gains(tiny_dataset, tmp_path):
    path = tmp_path / "results.csv"
    frame = sweep_alpha(_config(seeds=[1]), alphas=[0.0, 1.0], dataset=tiny_dataset,
                        writer=ResultsWriter(path), n_jobs=1)
    assert len(frame) == 2
    assert frame["alpha"].tolist() == [0.0, 1.0]
    baseline = frame[frame["alpha"] == 0.0]
    assert (baseline["probe_gain"] == 0.0).all()
    assert (baseline["mil_gain"] == 0.0).all()
    assert len(read_results_frame(path)) == 2


def test_sweep_distance_rows(tiny_dataset, tmp_path):
    path = tmp_path / "results.csv"
    frame = sweep_distance(_config(seeds=[1]), distances=[1, None], dataset=tiny_dataset,
                           writer=ResultsWriter(path), n_jobs=1)
    assert frame["d"].tolist() == ["1", "inf"]
    assert (frame["alpha"] == 0.5).all()
    assert {"probe_gain", "mil_gain"} <= set(frame.columns)

    written = read_results_frame(path)
    assert len(written) == 3
    assert written["sampling"].tolist().count("standard") == 1


def test_mismatch_report(tiny_dataset):
    frame = mismatch_report(tiny_dataset, [1, 2], within=True)
    assert frame["d"].tolist() == [1, 2]
    assert frame["mismatch"].between(0.0, 1.0).all()
    assert frame["mismatch"].iloc[0] == frame["mismatch_within"].iloc[0]


def test_mismatch_report_needs_lesion_slides(tiny_dataset):
    benign = SlideDataset(
        dataset_id="benign-only",
        train=[s for s in tiny_dataset.train if int(s.slide_label) == 0],
    )
    with pytest.raises(NoQualifyingSlidesException):
        mismatch_report(benign, [1])


def test_summarize_results(tiny_dataset):
    results = run_experiment(_config(), tiny_dataset, n_jobs=1)
    frame = results_frame(results)
    summary = summarize_results(frame)
    assert len(summary) == 1
    assert summary["n_seeds"].iloc[0] == 2
    expected = np.mean([r.probe_accuracy for r in results])
    assert abs(summary["probe_accuracy_mean"].iloc[0] - expected) < 1e-12
    records = result_records(summary)
    assert records[0]["method"] == "bt"


def test_summarize_empty_frame():
    assert summarize_results(pd.DataFrame()).empty


def test_bundled_quick_config_is_valid():
    path = Path(__file__).resolve().parents[1] / "config" / "experiments" / "quick.yaml"
    config = load_experiment_config(path)
    assert config.gen.rows == 16
    assert config.seeds == [1, 2]
