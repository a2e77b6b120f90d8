"""
유틸리티 함수들
"""
import hashlib
import logging
from typing import List, Mapping, Optional, Union

import numpy as np

from app.core.constants import ExperimentDefaults
from app.core.exceptions import ConfigException

logger = logging.getLogger(__name__)


def make_rng(*keys: int) -> np.random.Generator:
    """
    정수 키 조합으로 결정적인 난수 생성기 생성

    Args:
        keys: 시드, 슬라이드 ID 등 난수 스트림을 구분하는 정수들

    Returns:
        numpy Generator (같은 키면 같은 스트림)
    """
    return np.random.default_rng(np.random.SeedSequence([int(k) for k in keys]))


def hash_arrays(arrays: Mapping[str, np.ndarray]) -> str:
    """
    이름-배열 묶음의 SHA256 해시

    이름 순서대로 이름, dtype, shape, 원시 바이트를 모두 반영한다.

    Args:
        arrays: 이름 → 배열

    Returns:
        SHA256 해시값
    """
    digest = hashlib.sha256()
    for name in sorted(arrays):
        array = np.ascontiguousarray(arrays[name])
        digest.update(name.encode("utf-8"))
        digest.update(str(array.dtype).encode("utf-8"))
        digest.update(str(array.shape).encode("utf-8"))
        digest.update(array.tobytes())
    return digest.hexdigest()


def parse_distance(value: Union[str, int, None]) -> Optional[int]:
    """
    거리 제한 파싱 ("inf" → None)

    Args:
        value: 양의 정수 또는 "inf"

    Returns:
        정수 거리, 제한 없음이면 None

    Raises:
        ConfigException: 양의 정수도 "inf"도 아닐 때
    """
    if value is None:
        return None
    if isinstance(value, str):
        text = value.strip().lower()
        if text == ExperimentDefaults.UNBOUNDED_DISTANCE:
            return None
        try:
            value = int(text)
        except ValueError:
            raise ConfigException(f"거리는 양의 정수 또는 'inf'여야 합니다: {value}")
    if isinstance(value, bool) or int(value) != value or value < 1:
        raise ConfigException(f"거리는 1 이상이어야 합니다 (피벗은 자기 자신의 이웃이 아님): {value}")
    return int(value)


def format_distance(distance: Optional[int]) -> str:
    """None → "inf", 정수 → 문자열"""
    return ExperimentDefaults.UNBOUNDED_DISTANCE if distance is None else str(distance)


def parse_float_list(text: str) -> List[float]:
    """쉼표로 구분된 실수 목록 파싱"""
    try:
        return [float(item) for item in text.split(',') if item.strip()]
    except ValueError:
        raise ConfigException(f"실수 목록 형식이 아닙니다: {text}")


def parse_distance_list(text: str) -> List[Optional[int]]:
    """쉼표로 구분된 거리 목록 파싱 ("inf" 허용)"""
    return [parse_distance(item) for item in text.split(',') if item.strip()]

