"""
계산 그래프 노드 정의

Node는 값(Tensor), 입력 노드, 그리고 출력 기울기를 입력 기울기로 바꾸는
backward 함수를 가진다. 그래프는 배치마다 새로 만들고 역전파 후 버린다.
"""
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
import numpy.typing as npt

from app.core.exceptions import NonFiniteValueException

# 행 우선(row-major) 64비트 실수 배열
Tensor = npt.NDArray[np.float64]

BackwardFn = Callable[[Tensor], Sequence[Optional[Tensor]]]


def to_tensor(value, check_finite: bool = False) -> Tensor:
    """
    임의 배열/스칼라를 float64 Tensor로 변환

    Args:
        value: 배열 또는 스칼라
        check_finite: True면 NaN/Inf 검사

    Returns:
        float64 연속 배열 (입력과 메모리를 공유하지 않음)
    """
    tensor = np.array(value, dtype=np.float64, copy=True, order="C")
    if check_finite and not np.all(np.isfinite(tensor)):
        raise NonFiniteValueException(f"유한하지 않은 값이 포함된 텐서입니다 (shape={tensor.shape})")
    return tensor


class Node:
    """계산 그래프 노드"""

    __slots__ = ("op", "inputs", "value", "grad", "requires_grad", "_backward")

    def __init__(
            self,
            value: Tensor,
            inputs: Sequence["Node"] = (),
            op: str = "leaf",
            requires_grad: bool = False,
            backward: Optional[BackwardFn] = None,
    ):
        self.value = value
        self.inputs: Tuple["Node", ...] = tuple(inputs)
        self.op = op
        self.requires_grad = requires_grad or any(node.requires_grad for node in self.inputs)
        self.grad: Optional[Tensor] = None
        self._backward = backward

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.value.shape

    @property
    def is_leaf(self) -> bool:
        return not self.inputs

    def item(self) -> float:
        """크기 1 노드의 값을 float로 반환"""
        return float(self.value.reshape(-1)[0])

    def backward_fn(self) -> Optional[BackwardFn]:
        return self._backward

    def __repr__(self) -> str:
        return f"Node(op={self.op}, shape={self.shape}, requires_grad={self.requires_grad})"
