"""
사전학습 명령
"""
import logging
from pathlib import Path
from typing import Optional

import click

from app.base.cli_options import experiment_options, overrides_from, respond
from app.core.constants import ResponseMessages
from app.experiments.services.config_loader import load_experiment_config
from app.experiments.services.experiment_service import resolve_dataset
from app.experiments.services.results_writer import MetricsStream
from app.train.services.encoder_service import params_hash
from app.train.services.encoder_store import save_encoder
from app.train.services.pretrain_service import pretrain as run_pretrain
from config import settings

logger = logging.getLogger(__name__)

router = click.Group(name="train")


@router.command("pretrain", help="SSL 사전학습 후 인코더 저장")
@experiment_options
def pretrain(config_path: Optional[Path], out: Optional[Path], **options):
    """
    설정의 첫 시드(또는 --seed)로 인코더 사전학습

    인코더는 <out>/encoder.joblib, 메타는 encoder_meta.json,
    에폭별 손실은 metrics.jsonl에 기록된다.
    """
    config = load_experiment_config(config_path, overrides_from(options))
    seed = config.seeds[0]
    dataset = resolve_dataset(config)

    target = out or settings.output_dir / "encoders" / (
        f"{config.method.value}_{config.sampling.value}_a{config.alpha:g}_d{config.distance_label}_s{seed}"
    )
    metrics = MetricsStream(Path(target) / "metrics.jsonl")
    result = run_pretrain(dataset, config.train_config(seed), on_epoch=metrics)

    meta = {
        "dataset_id": dataset.dataset_id,
        "method": config.method.value,
        "sampling": config.sampling.value,
        "alpha": config.alpha,
        "d": config.distance_label,
        "seed": seed,
        "params_hash": params_hash(result.params),
        "epoch_losses": result.epoch_losses,
    }
    encoder_path = save_encoder(target, result.params, result.dims, meta)
    respond(
        {
            "encoder": str(encoder_path),
            "metrics": str(metrics.path),
            "params_hash": meta["params_hash"],
            "final_loss": result.epoch_losses[-1],
        },
        ResponseMessages.ENCODER_SAVED,
    )
