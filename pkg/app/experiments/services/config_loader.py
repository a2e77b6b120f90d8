"""
YAML 실험 설정 로더
"""
import logging
from pathlib import Path
from typing import Any, Dict, Optional

import yaml
from pydantic import ValidationError

from app.core.exceptions import ConfigException
from app.experiments.schema.schemas import ExperimentConfig

logger = logging.getLogger(__name__)

# CLI 옵션 이름 → ExperimentConfig 필드
_OVERRIDE_FIELDS = {
    "method": "method",
    "sampling": "sampling",
    "alpha": "alpha",
    "distance": "distance",
    "dataset": "dataset_path",
}


def read_yaml(config_path: Path) -> Dict[str, Any]:
    """YAML 파일을 dict로 읽기 (빈 파일은 빈 dict)"""
    path = Path(config_path)
    if not path.exists():
        raise ConfigException(f"설정 파일을 찾을 수 없습니다: {path}")
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = yaml.safe_load(f) or {}
    except yaml.YAMLError as e:
        raise ConfigException(f"YAML 형식 오류: {e}", details={"path": str(path)})
    if not isinstance(data, dict):
        raise ConfigException("설정 파일 최상위는 매핑이어야 합니다.", details={"path": str(path)})
    return data


def build_experiment_config(data: Dict[str, Any]) -> ExperimentConfig:
    try:
        return ExperimentConfig(**data)
    except ValidationError as e:
        raise ConfigException(f"실험 설정 검증 실패: {e}", details={"errors": e.errors()})


def load_experiment_config(
        config_path: Optional[Path] = None,
        overrides: Optional[Dict[str, Any]] = None,
) -> ExperimentConfig:
    """
    YAML 설정 + CLI 덮어쓰기로 실험 설정 생성

    Args:
        config_path: YAML 경로 (없으면 기본값)
        overrides: seed, method, sampling, alpha, distance, dataset (None 값은 무시)

    Returns:
        검증된 ExperimentConfig

    Raises:
        ConfigException: 파일이 없거나 YAML/검증 오류
    """
    data = read_yaml(config_path) if config_path else {}
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key == "seed":
            data["seeds"] = [int(value)]
        elif key in _OVERRIDE_FIELDS:
            data[_OVERRIDE_FIELDS[key]] = value
        else:
            raise ConfigException(f"알 수 없는 덮어쓰기 항목입니다: {key}")

    config = build_experiment_config(data)
    logger.debug(f"실험 설정: method={config.method.value}, sampling={config.sampling.value}, "
                 f"alpha={config.alpha}, d={config.distance_label}, seeds={config.seeds}")
    return config
