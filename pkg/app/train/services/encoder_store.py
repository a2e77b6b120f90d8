"""
학습된 인코더 저장/로드 (joblib + 메타 JSON)
"""
import json
import logging
from pathlib import Path
from typing import Tuple

import joblib

from app.core.exceptions import DataFormatException
from app.train.models.encoder import EncoderDims, EncoderParams

logger = logging.getLogger(__name__)

ENCODER_FILE = "encoder.joblib"
META_FILE = "encoder_meta.json"
META_VERSION = "cssl-encoder-1.0.0"


def save_encoder(out_dir: Path, params: EncoderParams, dims: EncoderDims, meta: dict) -> Path:
    """
    인코더 파라미터와 메타 정보 저장

    Returns:
        저장된 파라미터 파일 경로
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    params_path = out_dir / ENCODER_FILE
    meta_path = out_dir / META_FILE

    joblib.dump({"params": params, "dims": dims.to_dict()}, params_path)
    with open(meta_path, "w", encoding="utf-8") as f:
        json.dump({"version": META_VERSION, "dims": dims.to_dict(), **meta}, f, ensure_ascii=False, indent=2)

    logger.info(f"인코더 저장: {params_path}")
    logger.info(f"메타 저장: {meta_path}")
    return params_path


def load_encoder(path: Path) -> Tuple[EncoderParams, EncoderDims]:
    """
    save_encoder로 저장한 인코더 로드

    Args:
        path: joblib 파일 또는 그 파일이 있는 디렉터리

    Raises:
        DataFormatException: 파일이 없거나 형식이 다를 때
    """
    path = Path(path)
    if path.is_dir():
        path = path / ENCODER_FILE
    if not path.exists():
        raise DataFormatException(f"인코더 파일을 찾을 수 없습니다: {path}")
    payload = joblib.load(path)
    if not isinstance(payload, dict) or "params" not in payload or "dims" not in payload:
        raise DataFormatException(f"인코더 파일 형식이 아닙니다: {path}")
    return payload["params"], EncoderDims.from_dict(payload["dims"])
