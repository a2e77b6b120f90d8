"""
실험 실행 명령 (run, sweep-alpha, sweep-distance, summarize)
"""
import logging
from pathlib import Path
from typing import List, Optional

import click

from app.base.cli_options import experiment_options, force_option, methods_option, out_option, overrides_from, respond
from app.core.constants import ExperimentDefaults, ResponseMessages
from app.core.exceptions import ConfigException, DataFormatException
from app.core.utils import parse_distance_list, parse_float_list
from app.experiments.services.config_loader import load_experiment_config
from app.experiments.services.experiment_service import (
    resolve_dataset,
    result_records,
    run_experiment,
    summarize_results,
    sweep_alpha,
    sweep_distance,
)
from app.experiments.services.results_writer import ResultsWriter, read_results_frame, results_frame
from app.ssl.schema.schemas import SSLMethod
from config import settings

logger = logging.getLogger(__name__)

router = click.Group(name="experiments")


def _output_dir(out: Optional[Path]) -> Path:
    return Path(out) if out is not None else settings.output_dir


def _writer(out: Optional[Path], force: bool) -> ResultsWriter:
    return ResultsWriter(_output_dir(out) / settings.results_file_name, force=force)


def _parse_methods(text: Optional[str]) -> Optional[List[SSLMethod]]:
    if not text:
        return None
    try:
        return [SSLMethod(item.strip()) for item in text.split(",") if item.strip()]
    except ValueError:
        raise ConfigException(f"알 수 없는 방법이 있습니다: {text} (bt, byol, vicreg)")


@router.command("run", help="시드별 사전학습 → 프로빙 → ABMIL 실험")
@experiment_options
@force_option
def run(config_path: Optional[Path], out: Optional[Path], force: bool, **options):
    """결과를 <out>/results.csv에 추가하고 에폭별 손실을 <out>/metrics/에 기록"""
    config = load_experiment_config(config_path, overrides_from(options))
    writer = _writer(out, force)
    results = run_experiment(config, writer=writer, metrics_dir=_output_dir(out) / settings.metrics_dir_name)
    respond(
        {"results_file": str(writer.path), "rows": result_records(results_frame(results))},
        ResponseMessages.RESULTS_APPENDED,
    )


@router.command("sweep-alpha", help="α 스윕 (기준선 α=0 대비 정확도 변화)")
@experiment_options
@force_option
@methods_option
@click.option("--alphas", type=str, default=None, help="쉼표로 구분한 α 목록 (기본 0,0.25,0.5,0.75,1)")
def sweep_alpha_command(config_path: Optional[Path], out: Optional[Path], force: bool,
                        methods: Optional[str], alphas: Optional[str], **options):
    config = load_experiment_config(config_path, overrides_from(options))
    values = parse_float_list(alphas) if alphas else list(ExperimentDefaults.ALPHA_SWEEP)
    writer = _writer(out, force)
    table = sweep_alpha(
        config,
        values,
        _parse_methods(methods),
        dataset=resolve_dataset(config),
        writer=writer,
        metrics_dir=_output_dir(out) / settings.metrics_dir_name,
    )
    respond({"results_file": str(writer.path), "rows": result_records(table)}, ResponseMessages.RESULTS_APPENDED)


@router.command("sweep-distance", help="이웃 거리 스윕 (α=0.5, standard 대비 정확도 변화)")
@experiment_options
@force_option
@methods_option
@click.option("--distances", type=str, default=None, help="쉼표로 구분한 거리 목록 (기본 1,2,4,8, inf 허용)")
def sweep_distance_command(config_path: Optional[Path], out: Optional[Path], force: bool,
                           methods: Optional[str], distances: Optional[str], **options):
    config = load_experiment_config(config_path, overrides_from(options))
    values = parse_distance_list(distances) if distances else list(ExperimentDefaults.DISTANCE_SWEEP)
    writer = _writer(out, force)
    table = sweep_distance(
        config,
        values,
        _parse_methods(methods),
        dataset=resolve_dataset(config),
        writer=writer,
        metrics_dir=_output_dir(out) / settings.metrics_dir_name,
    )
    respond({"results_file": str(writer.path), "rows": result_records(table)}, ResponseMessages.RESULTS_APPENDED)


@router.command("summarize", help="결과 CSV의 시드 평균/표준편차 요약")
@out_option
@click.option("--results", "results_path", type=click.Path(dir_okay=False, path_type=Path), default=None,
              help="결과 CSV (기본 <out>/results.csv)")
def summarize(out: Optional[Path], results_path: Optional[Path]):
    path = results_path or _output_dir(out) / settings.results_file_name
    frame = read_results_frame(path)
    if frame.empty:
        raise DataFormatException(f"요약할 결과가 없습니다: {path}")
    summary = summarize_results(frame)
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        summary.to_csv(out / "summary.csv", index=False)
        logger.info(f"요약 저장: {out / 'summary.csv'}")
    respond({"results_file": str(path), "rows": result_records(summary)})
