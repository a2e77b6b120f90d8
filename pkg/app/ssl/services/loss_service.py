"""
Joint-embedding SSL 손실과 α 결합 목적함수

모든 손실은 배치 평균 스칼라 Node를 돌려주고 끝까지 미분 가능하다.
"""
import logging
from typing import Callable, Optional, Union

import numpy as np

from app.core.constants import Numerics
from app.core.exceptions import ConfigException, DegenerateBatchException, DimensionException
from app.ndgrad.models.node import Node
from app.ndgrad.services import ops
from app.ssl.models.embedding import ViewOutputs
from app.ssl.schema.schemas import CombinedLossConfig, SSLMethod

logger = logging.getLogger(__name__)

LossLike = Union[Node, float, Callable[[], Node]]


def _check_pair(kind: str, za: Node, zb: Node) -> None:
    if za.shape != zb.shape or za.value.ndim != 2:
        raise DimensionException(f"{kind}: 두 임베딩 배치의 shape가 다릅니다 {za.shape} vs {zb.shape}")
    if za.shape[0] < 2:
        raise DegenerateBatchException(f"{kind}: 배치 크기가 2 이상이어야 합니다 (N={za.shape[0]})")


def _masks(dim: int):
    eye = np.eye(dim)
    return ops.constant(eye), ops.constant(1.0 - eye)


def cross_correlation(za: Node, zb: Node) -> Node:
    """C = (1/N)·standardize(za)ᵀ·standardize(zb)"""
    n = za.shape[0]
    sa = ops.batch_standardize(za, Numerics.STANDARDIZE_EPSILON)
    sb = ops.batch_standardize(zb, Numerics.STANDARDIZE_EPSILON)
    return ops.scale(ops.matmul(ops.transpose(sa), sb), 1.0 / n)


def barlow_twins_loss(za: Node, zb: Node, bt_lambda: float = 0.005) -> Node:
    """
    Barlow Twins: Σᵢ(1−Cᵢᵢ)² + λ·Σ_{i≠j}Cᵢⱼ²

    Raises:
        DegenerateBatchException: N < 2
    """
    _check_pair("barlow_twins", za, zb)
    c = cross_correlation(za, zb)
    eye, off = _masks(c.shape[0])
    on_diagonal = ops.reduce_sum(ops.square(ops.mul(ops.sub(c, eye), eye)))
    off_diagonal = ops.reduce_sum(ops.square(ops.mul(c, off)))
    return ops.add(on_diagonal, ops.scale(off_diagonal, bt_lambda))


def _center(z: Node) -> Node:
    return ops.add_row(z, ops.scale(ops.reduce_mean(z, axis=0), -1.0))


def _variance_term(centered: Node, gamma: float, epsilon: float) -> Node:
    n = centered.shape[0]
    variance = ops.scale(ops.reduce_sum(ops.square(centered), axis=0), 1.0 / (n - 1))
    std = ops.sqrt(ops.add_scalar(variance, epsilon))
    return ops.reduce_mean(ops.relu(ops.add_scalar(ops.scale(std, -1.0), gamma)))


def _covariance_term(centered: Node) -> Node:
    n, dim = centered.shape
    covariance = ops.scale(ops.matmul(ops.transpose(centered), centered), 1.0 / (n - 1))
    _, off = _masks(dim)
    return ops.scale(ops.reduce_sum(ops.square(ops.mul(covariance, off))), 1.0 / dim)


def vicreg_loss(za: Node, zb: Node, config: Optional[CombinedLossConfig] = None) -> Node:
    """
    VICReg: λ_inv·MSE + μ_var·[v(za)+v(zb)] + ν_cov·[c(za)+c(zb)]

    분산/공분산은 N−1로 나눈 불편 추정치를 쓴다.

    Raises:
        DegenerateBatchException: N < 2
    """
    config = config or CombinedLossConfig()
    _check_pair("vicreg", za, zb)

    invariance = ops.reduce_mean(ops.square(ops.sub(za, zb)))
    ca, cb = _center(za), _center(zb)
    variance = ops.add(
        _variance_term(ca, config.vicreg_gamma, config.vicreg_epsilon),
        _variance_term(cb, config.vicreg_gamma, config.vicreg_epsilon),
    )
    covariance = ops.add(_covariance_term(ca), _covariance_term(cb))

    return ops.add(
        ops.add(ops.scale(invariance, config.vicreg_invariance), ops.scale(variance, config.vicreg_variance)),
        ops.scale(covariance, config.vicreg_covariance),
    )


def byol_pair_loss(prediction: Node, target: Node) -> Node:
    """
    BYOL 한 방향 손실: 행 평균 2 − 2·cos(q, z)

    target은 상수로 취급한다 (stop-gradient).

    Raises:
        NormalizationException: 노름이 0인 행
    """
    if prediction.shape != target.shape or prediction.value.ndim != 2:
        raise DimensionException(f"byol: shape가 다릅니다 {prediction.shape} vs {target.shape}")
    q = ops.row_normalize(prediction)
    z = ops.row_normalize(ops.detach(target))
    cosine = ops.reduce_sum(ops.mul(q, z), axis=1)
    return ops.add_scalar(ops.scale(ops.reduce_mean(cosine), -2.0), 2.0)


def byol_symmetric_loss(left: ViewOutputs, right: ViewOutputs) -> Node:
    """½[pair(q_left, z_right) + pair(q_right, z_left)]"""
    if left.prediction is None or left.target is None or right.prediction is None or right.target is None:
        raise ValueError("BYOL 손실에는 prediction과 target 출력이 모두 필요합니다.")
    return ops.scale(
        ops.add(byol_pair_loss(left.prediction, right.target), byol_pair_loss(right.prediction, left.target)),
        0.5,
    )


def pair_loss(left: ViewOutputs, right: ViewOutputs, config: CombinedLossConfig) -> Node:
    """설정된 방법의 두 뷰 손실"""
    if config.method == SSLMethod.BARLOW_TWINS:
        return barlow_twins_loss(left.projection, right.projection, config.bt_lambda)
    if config.method == SSLMethod.VICREG:
        return vicreg_loss(left.projection, right.projection, config)
    if config.method == SSLMethod.BYOL:
        return byol_symmetric_loss(left, right)
    raise ConfigException(f"지원하지 않는 SSL 방법입니다: {config.method}")


def _resolve(loss: LossLike, branch: str) -> Node:
    if loss is None:
        raise ConfigException(f"{branch} 손실이 필요합니다.")
    if callable(loss) and not isinstance(loss, Node):
        loss = loss()
    return ops.as_node(loss)


def combined_loss(loss_ctx: LossLike, loss_std: LossLike, alpha: float) -> Node:
    """
    L' = α·L_ctx + (1−α)·L_std

    각 항은 Node, 실수, 또는 인자 없는 함수(지연 평가)일 수 있다.
    α가 0이면 L_ctx를, 1이면 L_std를 아예 평가하지 않는다.

    Raises:
        ConfigException: α가 [0, 1] 밖일 때
    """
    alpha = float(alpha)
    if not 0.0 <= alpha <= 1.0:
        raise ConfigException(f"alpha는 0~1 범위여야 합니다: {alpha}", details={"alpha": alpha})
    if alpha == 0.0:
        return _resolve(loss_std, "standard")
    if alpha == 1.0:
        return _resolve(loss_ctx, "context")
    return ops.add(
        ops.scale(_resolve(loss_ctx, "context"), alpha),
        ops.scale(_resolve(loss_std, "standard"), 1.0 - alpha),
    )
