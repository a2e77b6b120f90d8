"""
패치 좌표 및 쌍 배치 모델
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np

from app.augment.models.transform import Transform


class SamplingMode(str, Enum):
    STANDARD = "standard"
    CONTEXT = "context"


@dataclass(frozen=True, order=True)
class PatchCoord:
    """슬라이드 안 격자 좌표"""
    slide_id: int
    row: int
    col: int


@dataclass
class PairBatch:
    """
    피벗별 세 가지 뷰

    view_a = t1(pivot), view_b = t2(pivot), view_ctx = t1(neighbor).
    view_ctx와 neighbors는 standard 모드에서 None이다.
    """
    view_a: np.ndarray
    view_b: np.ndarray
    view_ctx: Optional[np.ndarray]
    pivots: List[PatchCoord]
    neighbors: Optional[List[PatchCoord]]
    transforms: List[Tuple[Transform, Transform]] = field(default_factory=list)

    @property
    def size(self) -> int:
        return int(self.view_a.shape[0])

    @property
    def has_context(self) -> bool:
        return self.view_ctx is not None
