"""
하류 평가 명령 (선형 프로빙, ABMIL)
"""
import json
import logging
from pathlib import Path
from typing import Optional

import click
import joblib

from app.base.cli_options import experiment_options, overrides_from, respond
from app.core.exceptions import ConfigException
from app.eval.models.classifier import EvalResult
from app.eval.services.mil_service import build_bags, train_mil
from app.eval.services.probe_service import run_linear_probe, train_supervised_baseline
from app.experiments.services.config_loader import load_experiment_config
from app.experiments.services.experiment_service import resolve_dataset
from app.train.services.encoder_service import init_params
from app.train.services.encoder_store import load_encoder
from app.train.services.pretrain_service import dims_for

logger = logging.getLogger(__name__)

router = click.Group(name="eval")

params_option = click.option("--params", "params_path", type=click.Path(path_type=Path), default=None,
                             help="저장된 인코더 (encoder.joblib 또는 그 디렉터리)")


def _summary(result: EvalResult, seed: int, **extra) -> dict:
    return {
        "seed": seed,
        "train_accuracy": result.train_accuracy,
        "val_accuracy": result.val_accuracy,
        "test_accuracy": result.test_accuracy,
        "test_auroc": result.test_auroc,
        "best_epoch": result.best_epoch,
        **extra,
    }


def _save(out: Optional[Path], name: str, result: EvalResult, summary: dict) -> None:
    """--out이 있으면 분류기(joblib)와 지표(JSON) 저장"""
    if out is None:
        return
    out.mkdir(parents=True, exist_ok=True)
    joblib.dump({"params": result.params, "scaler": result.scaler}, out / f"{name}.joblib")
    with open(out / f"{name}_meta.json", "w", encoding="utf-8") as f:
        json.dump({**summary, "losses": result.losses}, f, ensure_ascii=False, indent=2)
    logger.info(f"분류기 저장: {out / (name + '.joblib')}")


@router.command("probe", help="고정 인코더 위 선형 프로빙")
@experiment_options
@params_option
@click.option("--supervised", is_flag=True, default=False, help="같은 백본을 패치 라벨로 처음부터 학습 (기준선)")
def probe(config_path: Optional[Path], out: Optional[Path], params_path: Optional[Path], supervised: bool, **options):
    """
    패치 수준 평가

    --params가 없으면 학습하지 않은 초기 인코더로 프로빙한다.
    """
    config = load_experiment_config(config_path, overrides_from(options))
    seed = config.seeds[0]
    dataset = resolve_dataset(config)

    if supervised:
        result = train_supervised_baseline(dataset, config.eval, seed)
        summary = _summary(result, seed, encoder="supervised")
        _save(out, "supervised", result, summary)
        respond(summary)
        return

    if params_path is not None:
        params, dims = load_encoder(params_path)
        source = str(params_path)
    else:
        dims = dims_for(config.train_config(seed), dataset.patch_shape)
        params = init_params(seed, dims)
        source = "untrained"
        logger.info("인코더가 지정되지 않아 초기화 상태 인코더로 프로빙합니다.")

    result = run_linear_probe(params, dims, dataset, config.eval, seed)
    summary = _summary(result, seed, encoder=source)
    _save(out, "probe", result, summary)
    respond(summary)


@router.command("mil", help="고정 인코더 임베딩으로 ABMIL 슬라이드 분류")
@experiment_options
@params_option
def mil(config_path: Optional[Path], out: Optional[Path], params_path: Optional[Path], **options):
    """슬라이드 수준 평가 (--params 필수)"""
    if params_path is None:
        raise ConfigException("mil 명령에는 --params (저장된 인코더)가 필요합니다.")
    config = load_experiment_config(config_path, overrides_from(options))
    seed = config.seeds[0]
    dataset = resolve_dataset(config)
    params, dims = load_encoder(params_path)

    result = train_mil(
        build_bags(params, dims, dataset.train),
        config.eval,
        seed,
        val_bags=build_bags(params, dims, dataset.val),
        test_bags=build_bags(params, dims, dataset.test),
    )
    summary = _summary(result, seed, encoder=str(params_path))
    _save(out, "mil", result, summary)
    respond(summary)
