"""
가상 슬라이드 데이터 모델
"""
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Dict, Iterator, List, Optional

import numpy as np


class TissueClass(IntEnum):
    """조직 클래스 (값이 클수록 중증)"""
    BENIGN = 0
    DYSPLASIA = 1
    MALIGNANT = 2


@dataclass
class VirtualSlide:
    """
    패치 격자 슬라이드

    patches: (rows, cols, H, W, C) float32, 값 범위 [0,1]
    labels: (rows, cols) uint8 TissueClass
    """
    slide_id: int
    patches: np.ndarray
    labels: np.ndarray
    slide_label: TissueClass

    @property
    def rows(self) -> int:
        return int(self.labels.shape[0])

    @property
    def cols(self) -> int:
        return int(self.labels.shape[1])

    @property
    def patch_shape(self):
        return tuple(int(s) for s in self.patches.shape[2:])

    @property
    def patch_count(self) -> int:
        return self.rows * self.cols

    def patch(self, row: int, col: int) -> np.ndarray:
        return self.patches[row, col]


SPLIT_NAMES = ("train", "val", "test")


@dataclass
class SlideDataset:
    """train/val/test 분할된 슬라이드 모음"""
    dataset_id: str
    train: List[VirtualSlide] = field(default_factory=list)
    val: List[VirtualSlide] = field(default_factory=list)
    test: List[VirtualSlide] = field(default_factory=list)
    gen_config: Optional[dict] = None

    def split(self, name: str) -> List[VirtualSlide]:
        if name not in SPLIT_NAMES:
            raise KeyError(f"알 수 없는 분할입니다: {name}")
        return getattr(self, name)

    def splits(self) -> Dict[str, List[VirtualSlide]]:
        return {name: self.split(name) for name in SPLIT_NAMES}

    def all_slides(self) -> Iterator[VirtualSlide]:
        for name in SPLIT_NAMES:
            yield from self.split(name)

    @property
    def patch_shape(self):
        for slide in self.all_slides():
            return slide.patch_shape
        return None
