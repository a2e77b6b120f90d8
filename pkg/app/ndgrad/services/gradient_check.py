"""
중앙 차분 기반 기울기 검증
"""
import logging
from typing import Callable, Optional

import numpy as np

from app.core.constants import Numerics
from app.core.exceptions import NonFiniteValueException
from app.ndgrad.models.node import Node, Tensor, to_tensor
from app.ndgrad.services.ops import backward, leaf

logger = logging.getLogger(__name__)

ScalarFn = Callable[[Node], Node]


def _evaluate(f: ScalarFn, x: Tensor) -> float:
    value = f(leaf(x, requires_grad=False)).item()
    if not np.isfinite(value):
        raise NonFiniteValueException(f"기울기 검증 대상 함수 값이 유한하지 않습니다: {value}")
    return value


def grad_check(
        f: ScalarFn,
        x,
        step: float = 1e-5,
        max_coords: Optional[int] = None,
        rng: Optional[np.random.Generator] = None,
) -> float:
    """
    역전파 기울기와 중앙 차분 기울기의 최대 상대 오차

    Args:
        f: Node → 스칼라 Node 함수
        x: 검사 지점
        step: 차분 간격 (양수)
        max_coords: 지정하면 좌표를 무작위로 이만큼만 검사
        rng: max_coords 사용 시 좌표 선택용 난수 생성기

    Returns:
        max |analytic - numeric| / max(1e-12, |analytic| + |numeric|)

    Raises:
        NonFiniteValueException: f(x)가 유한하지 않을 때
    """
    if step <= 0:
        raise ValueError(f"step은 양수여야 합니다: {step}")
    x = to_tensor(x)

    point = leaf(x)
    loss = f(point)
    if not np.isfinite(loss.item()):
        raise NonFiniteValueException(f"기울기 검증 대상 함수 값이 유한하지 않습니다: {loss.item()}")
    grads = backward(loss)
    analytic = grads.get(point, np.zeros_like(x)).reshape(-1)

    coords = np.arange(x.size)
    if max_coords is not None and max_coords < x.size:
        rng = rng if rng is not None else np.random.default_rng(0)
        coords = np.sort(rng.choice(x.size, size=max_coords, replace=False))

    flat = x.reshape(-1)
    worst = 0.0
    for index in coords:
        original = flat[index]
        flat[index] = original + step
        upper = _evaluate(f, x)
        flat[index] = original - step
        lower = _evaluate(f, x)
        flat[index] = original
        numeric = (upper - lower) / (2.0 * step)
        error = abs(analytic[index] - numeric) / max(
            Numerics.GRAD_CHECK_FLOOR, abs(analytic[index]) + abs(numeric)
        )
        worst = max(worst, float(error))

    logger.debug(f"기울기 검증 완료: coords={len(coords)}, max_rel_error={worst:.3e}")
    return worst
