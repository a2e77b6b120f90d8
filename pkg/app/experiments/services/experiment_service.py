"""
실험 실행 서비스

시드별 사전학습 → 인코더 고정 → 선형 프로빙 + ABMIL 평가를 수행하고,
α/거리 스윕과 불일치율 보고서를 만든다.
"""
import json
import logging
import time
from pathlib import Path
from typing import List, Optional, Sequence

import pandas as pd
from joblib import Parallel, delayed

from app.core.constants import RESULT_COLUMNS, ExperimentDefaults
from app.core.exceptions import BaseLabException, ConfigException, NoQualifyingSlidesException
from app.core.utils import format_distance
from app.eval.services.mil_service import build_bags, train_mil
from app.eval.services.probe_service import run_linear_probe
from app.experiments.schema.schemas import ExperimentConfig, ExperimentResult
from app.experiments.services.dataset_io import load_dataset
from app.experiments.services.results_writer import MetricsStream, ResultsWriter, results_frame
from app.sampler.models.sampling import SamplingMode
from app.sampler.services.sampler_service import mismatch_rate
from app.slidegen.models.slide import SlideDataset, TissueClass
from app.slidegen.services.slide_service import generate_dataset
from app.ssl.schema.schemas import SSLMethod
from app.train.services.pretrain_service import pretrain
from config import settings

logger = logging.getLogger(__name__)

METRIC_COLUMNS = ("probe_accuracy", "probe_auroc", "mil_accuracy", "mil_auroc")
GAIN_COLUMNS = ("probe_gain", "mil_gain")


def resolve_dataset(config: ExperimentConfig) -> SlideDataset:
    """저장된 데이터셋이 있으면 로드, 없으면 생성"""
    if config.dataset_path:
        return load_dataset(Path(config.dataset_path))
    return generate_dataset(config.gen, config.counts)


def run_context(config: ExperimentConfig, seed: Optional[int] = None) -> dict:
    context = {
        "method": config.method.value,
        "sampling": config.sampling.value,
        "alpha": config.alpha,
        "distance": config.distance_label,
    }
    if seed is not None:
        context["seed"] = seed
    return context


def _metrics_path(metrics_dir: Path, config: ExperimentConfig, seed: int) -> Path:
    return metrics_dir / f"{config.method.value}_{config.sampling.value}_a{config.alpha:g}_d{config.distance_label}_s{seed}.jsonl"


def run_seed(
        config: ExperimentConfig,
        dataset: SlideDataset,
        seed: int,
        metrics_dir: Optional[Path] = None,
) -> ExperimentResult:
    """시드 하나: 사전학습 → 프로빙 → ABMIL"""
    started = time.perf_counter()
    try:
        on_epoch = MetricsStream(_metrics_path(metrics_dir, config, seed)) if metrics_dir else None
        trained = pretrain(dataset, config.train_config(seed), on_epoch=on_epoch)

        probe = run_linear_probe(trained.params, trained.dims, dataset, config.eval, seed)
        mil = train_mil(
            build_bags(trained.params, trained.dims, dataset.train),
            config.eval,
            seed,
            val_bags=build_bags(trained.params, trained.dims, dataset.val),
            test_bags=build_bags(trained.params, trained.dims, dataset.test),
        )
    except BaseLabException as e:
        raise e.with_context(**run_context(config, seed))

    result = ExperimentResult(
        dataset_id=dataset.dataset_id,
        method=config.method.value,
        sampling=config.sampling.value,
        alpha=config.alpha,
        d=config.distance_label,
        seed=seed,
        probe_accuracy=probe.test_accuracy,
        probe_auroc=probe.test_auroc,
        mil_accuracy=mil.test_accuracy,
        mil_auroc=mil.test_auroc,
        wall_time=time.perf_counter() - started,
    )
    logger.info(
        f"✓ {config.method.value}/{config.sampling.value} α={config.alpha} d={config.distance_label} "
        f"seed={seed}: probe_acc={result.probe_accuracy:.3f}, mil_acc={result.mil_accuracy:.3f}"
    )
    return result


def run_experiment(
        config: ExperimentConfig,
        dataset: Optional[SlideDataset] = None,
        writer: Optional[ResultsWriter] = None,
        metrics_dir: Optional[Path] = None,
        n_jobs: Optional[int] = None,
) -> List[ExperimentResult]:
    """
    시드별 실험 실행 (시드 순서대로 결과 반환)

    Args:
        config: 실험 설정
        dataset: 미리 준비한 데이터셋 (없으면 설정으로 준비)
        writer: 결과 CSV 기록기
        metrics_dir: 에폭별 손실 JSONL 디렉터리
        n_jobs: 병렬 워커 수 (기본 settings.n_jobs)

    Returns:
        시드당 ExperimentResult 1개
    """
    dataset = dataset if dataset is not None else resolve_dataset(config)
    n_jobs = n_jobs if n_jobs is not None else settings.n_jobs

    logger.info("=" * 80)
    logger.info(f"실험 시작: {run_context(config)}, seeds={config.seeds}")
    logger.info("=" * 80)

    results = Parallel(n_jobs=n_jobs, prefer="threads")(
        delayed(run_seed)(config, dataset, seed, metrics_dir) for seed in config.seeds
    )
    if writer is not None:
        writer.append(results)
    return list(results)


def _with_gains(frame: pd.DataFrame, baseline: pd.DataFrame) -> pd.DataFrame:
    """시드별 기준선 대비 정확도 차이"""
    base = baseline.set_index(["method", "seed"])[["probe_accuracy", "mil_accuracy"]]
    joined = frame.join(base, on=["method", "seed"], rsuffix="_baseline")
    joined["probe_gain"] = joined["probe_accuracy"] - joined["probe_accuracy_baseline"]
    joined["mil_gain"] = joined["mil_accuracy"] - joined["mil_accuracy_baseline"]
    return joined.drop(columns=["probe_accuracy_baseline", "mil_accuracy_baseline"])


def _methods(base: ExperimentConfig, methods: Optional[Sequence[SSLMethod]]) -> List[SSLMethod]:
    return [SSLMethod(m) for m in methods] if methods else [base.method]


def sweep_alpha(
        base: ExperimentConfig,
        alphas: Sequence[float] = ExperimentDefaults.ALPHA_SWEEP,
        methods: Optional[Sequence[SSLMethod]] = None,
        dataset: Optional[SlideDataset] = None,
        writer: Optional[ResultsWriter] = None,
        metrics_dir: Optional[Path] = None,
        n_jobs: Optional[int] = None,
) -> pd.DataFrame:
    """
    α 스윕 (context 샘플링, 거리는 base 설정)

    gain = accuracy(α) − accuracy(α=0), 시드별로 계산한다.

    Returns:
        |methods|×|α|×|seeds| 행, 결과 컬럼 + probe_gain, mil_gain

    Raises:
        ConfigException: α 목록에 기준선 0이 없을 때
    """
    if 0.0 not in [float(a) for a in alphas]:
        raise ConfigException("α 스윕에는 기준선 α=0이 포함되어야 합니다.", details={"alphas": list(alphas)})
    dataset = dataset if dataset is not None else resolve_dataset(base)

    frames = []
    for method in _methods(base, methods):
        rows = []
        for alpha in alphas:
            config = base.variant(method=method, sampling=SamplingMode.CONTEXT, alpha=float(alpha))
            rows.extend(run_experiment(config, dataset, writer, metrics_dir, n_jobs))
        frame = results_frame(rows)
        frames.append(_with_gains(frame, frame[frame["alpha"] == 0.0]))
    return pd.concat(frames, ignore_index=True)


def sweep_distance(
        base: ExperimentConfig,
        distances: Sequence[Optional[int]] = ExperimentDefaults.DISTANCE_SWEEP,
        methods: Optional[Sequence[SSLMethod]] = None,
        dataset: Optional[SlideDataset] = None,
        writer: Optional[ResultsWriter] = None,
        metrics_dir: Optional[Path] = None,
        n_jobs: Optional[int] = None,
) -> pd.DataFrame:
    """
    거리 스윕 (α = 0.5 고정)

    gain은 같은 방법, 같은 시드의 standard 실행 대비 정확도 차이다.
    standard 기준선 행은 결과 CSV에만 기록되고 반환 표에는 없다.

    Returns:
        |d|×|seeds|×|methods| 행, 결과 컬럼 + probe_gain, mil_gain
    """
    distance_values = [format_distance(d) if d is None else d for d in distances]
    dataset = dataset if dataset is not None else resolve_dataset(base)

    frames = []
    for method in _methods(base, methods):
        baseline_config = base.variant(method=method, sampling=SamplingMode.STANDARD, alpha=0.0, distance=1)
        baseline = results_frame(run_experiment(baseline_config, dataset, writer, metrics_dir, n_jobs))
        rows = []
        for distance in distance_values:
            config = base.variant(
                method=method,
                sampling=SamplingMode.CONTEXT,
                alpha=ExperimentDefaults.DISTANCE_SWEEP_ALPHA,
                distance=distance,
            )
            rows.extend(run_experiment(config, dataset, writer, metrics_dir, n_jobs))
        frames.append(_with_gains(results_frame(rows), baseline))
    return pd.concat(frames, ignore_index=True)


def mismatch_report(dataset: SlideDataset, distances: Sequence[int] = ExperimentDefaults.DISTANCE_SWEEP,
                    within: bool = False) -> pd.DataFrame:
    """
    non-benign 슬라이드(전체 분할)의 거리별 불일치율

    Returns:
        컬럼 d, mismatch (within이면 mismatch_within 추가)

    Raises:
        NoQualifyingSlidesException: non-benign 슬라이드가 없을 때
    """
    slides = [slide for slide in dataset.all_slides() if slide.slide_label != TissueClass.BENIGN]
    if not slides:
        raise NoQualifyingSlidesException(details={"dataset_id": dataset.dataset_id})

    logger.info(f"불일치율 계산: non-benign 슬라이드 {len(slides)}장, d={list(distances)}")
    rows = []
    for d in distances:
        row = {"d": int(d), "mismatch": mismatch_rate(slides, int(d))}
        if within:
            row["mismatch_within"] = mismatch_rate(slides, int(d), within=True)
        rows.append(row)
    return pd.DataFrame(rows)


def summarize_results(frame: pd.DataFrame) -> pd.DataFrame:
    """
    (dataset_id, method, sampling, alpha, d)별 시드 평균/표준편차

    gain 컬럼이 있으면 함께 요약한다.
    """
    if frame.empty:
        return pd.DataFrame()
    group_keys = ["dataset_id", "method", "sampling", "alpha", "d"]
    value_columns = [c for c in (*METRIC_COLUMNS, *GAIN_COLUMNS, "wall_time") if c in frame.columns]

    grouped = frame.groupby(group_keys, sort=True, dropna=False)
    summary = grouped[value_columns].agg(["mean", "std"])
    summary.columns = [f"{column}_{stat}" for column, stat in summary.columns]
    summary["n_seeds"] = grouped["seed"].nunique()
    return summary.reset_index()


def result_records(frame: pd.DataFrame) -> List[dict]:
    """JSON 응답용 레코드 (NaN → null)"""
    return json.loads(frame.to_json(orient="records"))


__all__ = [
    "GAIN_COLUMNS",
    "METRIC_COLUMNS",
    "RESULT_COLUMNS",
    "mismatch_report",
    "resolve_dataset",
    "result_records",
    "run_experiment",
    "run_seed",
    "summarize_results",
    "sweep_alpha",
    "sweep_distance",
]
