"""
하류 평가 모델 (bag, ABMIL, 선형 분류기)
"""
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np


@dataclass
class Bag:
    """슬라이드 한 장의 인스턴스 임베딩 묶음 [N×D]"""
    slide_id: int
    instances: np.ndarray
    slide_label: int

    @property
    def size(self) -> int:
        return int(self.instances.shape[0])


@dataclass
class MILParams:
    """attention V [h×D], w [h], 분류기 W [C×D], b [C]"""
    V: np.ndarray
    w: np.ndarray
    W: np.ndarray
    b: np.ndarray

    @property
    def hidden(self) -> int:
        return int(self.V.shape[0])

    def to_dict(self) -> Dict[str, np.ndarray]:
        return {"V": self.V, "w": self.w, "W": self.W, "b": self.b}

    @classmethod
    def from_dict(cls, data: Dict[str, np.ndarray]) -> "MILParams":
        return cls(V=data["V"], w=data["w"], W=data["W"], b=data["b"])


@dataclass
class ProbeParams:
    """선형 분류기 W [C×D], b [C]"""
    W: np.ndarray
    b: np.ndarray

    def to_dict(self) -> Dict[str, np.ndarray]:
        return {"W": self.W, "b": self.b}

    @classmethod
    def from_dict(cls, data: Dict[str, np.ndarray]) -> "ProbeParams":
        return cls(W=data["W"], b=data["b"])


@dataclass
class EvalResult:
    """
    학습된 분류기와 분할별 지표

    best_epoch: 검증 정확도가 가장 높았던 에폭 (동률이면 가장 이른 에폭)
    """
    params: object
    train_accuracy: float
    val_accuracy: Optional[float]
    test_accuracy: Optional[float]
    test_auroc: Optional[float]
    best_epoch: int
    losses: List[float] = field(default_factory=list)
    scaler: Optional[object] = None
