"""
뷰 하나의 인코딩 결과
"""
from dataclasses import dataclass
from typing import Optional

from app.ndgrad.models.node import Node


@dataclass
class ViewOutputs:
    """
    projection: 온라인 projector 출력 [N×16]
    prediction: BYOL predictor 출력 (BYOL만)
    target: BYOL EMA target projector 출력 (BYOL만, 그래프와 끊긴 상수)
    """
    projection: Node
    prediction: Optional[Node] = None
    target: Optional[Node] = None
