"""
합성 슬라이드 관련 명령
"""
import logging
from pathlib import Path
from typing import Optional

import click

from app.base.cli_options import config_option, dataset_option, out_option, respond, seed_option
from app.core.constants import ExperimentDefaults, ResponseMessages
from app.core.utils import parse_distance_list
from app.core.exceptions import ConfigException
from app.experiments.services.config_loader import load_experiment_config
from app.experiments.services.dataset_io import load_dataset, save_dataset
from app.experiments.services.experiment_service import mismatch_report, result_records, resolve_dataset
from app.slidegen.schema.schemas import GenConfig, GenerateSummary
from app.slidegen.services.slide_service import dataset_hash, generate_dataset, prototype_separation
from config import settings

logger = logging.getLogger(__name__)

router = click.Group(name="slidegen")


@router.command("generate", help="합성 슬라이드 데이터셋 생성 및 저장")
@config_option
@seed_option
@out_option
def generate(config_path: Optional[Path], seed: Optional[int], out: Optional[Path]):
    """
    합성 데이터셋 생성

    - **--seed**: 생성기 시드 (설정의 gen.seed 대신)
    - **--out**: 저장 디렉터리 (기본 OUTPUT_DIR/datasets/<dataset_id>)
    """
    config = load_experiment_config(config_path)
    gen = config.gen if seed is None else GenConfig(**{**config.gen.dict(), "seed": seed})
    dataset = generate_dataset(gen, config.counts)

    target = out or settings.output_dir / "datasets" / dataset.dataset_id
    manifest = save_dataset(dataset, target)
    summary = GenerateSummary(
        dataset_id=dataset.dataset_id,
        manifest=str(manifest),
        slides={name: len(slides) for name, slides in dataset.splits().items()},
        dataset_hash=dataset_hash(dataset),
        prototype_separation=prototype_separation(gen),
    )
    respond(summary.dict(), ResponseMessages.DATASET_SAVED)


@router.command("mismatch", help="non-benign 슬라이드의 거리별 라벨 불일치율")
@config_option
@dataset_option
@out_option
@click.option("--distances", type=str, default=None, help="쉼표로 구분한 거리 목록 (기본 1,2,4,8)")
@click.option("--within", is_flag=True, default=False, help="1 ≤ 거리 ≤ d 누적 불일치율도 계산")
def mismatch(config_path: Optional[Path], dataset: Optional[Path], out: Optional[Path],
             distances: Optional[str], within: bool):
    """거리별 불일치율 표 (--out이 있으면 mismatch.csv로 저장)"""
    values = parse_distance_list(distances) if distances else list(ExperimentDefaults.DISTANCE_SWEEP)
    if any(d is None for d in values):
        raise ConfigException("불일치율 거리에는 'inf'를 쓸 수 없습니다.", details={"distances": distances})

    if dataset is not None:
        slides = load_dataset(dataset)
    else:
        slides = resolve_dataset(load_experiment_config(config_path))

    report = mismatch_report(slides, values, within=within)
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        report.to_csv(out / "mismatch.csv", index=False)
        logger.info(f"불일치율 표 저장: {out / 'mismatch.csv'}")
    respond({"dataset_id": slides.dataset_id, "rows": result_records(report)})
