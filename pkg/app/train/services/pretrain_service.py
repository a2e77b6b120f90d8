"""
SSL 사전학습 루프

build_batch → 뷰 인코딩 → α 결합 손실 → 역전파 → sgd_step (BYOL은 ema_update까지).
"""
import logging
from typing import Callable, Dict, List, Mapping, Optional

import numpy as np

from app.core.exceptions import BatchException, NonFiniteLossException
from app.core.utils import make_rng
from app.ndgrad.models.node import Node
from app.ndgrad.services import ops
from app.sampler.models.sampling import PairBatch
from app.sampler.services.sampler_service import build_batch
from app.slidegen.models.slide import SlideDataset
from app.ssl.models.embedding import ViewOutputs
from app.ssl.schema.schemas import CombinedLossConfig, SSLMethod
from app.ssl.services.loss_service import combined_loss, pair_loss
from app.train.models.encoder import EncoderDims, EncoderParams, PretrainResult
from app.train.schema.schemas import TrainConfig
from app.train.services.encoder_service import (
    constant_params,
    ema_update,
    encoder_forward,
    flatten_images,
    init_params,
    predictor_forward,
    sgd_step,
)

logger = logging.getLogger(__name__)

EpochCallback = Callable[[int, float], None]


def dims_for(config: TrainConfig, patch_shape) -> EncoderDims:
    """데이터셋 패치 크기와 설정으로 인코더 구조 결정"""
    return EncoderDims(
        input_dim=int(np.prod(patch_shape)),
        hidden_dims=tuple(config.hidden_dims),
        embedding_dim=config.embedding_dim,
        projector_hidden=config.projector_hidden,
        projection_dim=config.projection_dim,
        predictor=config.loss.method == SSLMethod.BYOL,
    )


def encode_view(
        params: Mapping[str, Node],
        view: np.ndarray,
        dims: EncoderDims,
        target_params: Optional[Mapping[str, Node]] = None,
) -> ViewOutputs:
    """
    뷰 한 묶음을 온라인 네트워크(및 BYOL target)로 인코딩

    target_params가 주어지면 prediction과 target projection까지 계산한다.
    """
    x = ops.constant(flatten_images(view, dims))
    _, projection = encoder_forward(params, x, dims)
    if not dims.predictor:
        return ViewOutputs(projection=projection)
    _, target_projection = encoder_forward(target_params, x, dims)
    return ViewOutputs(
        projection=projection,
        prediction=predictor_forward(params, projection),
        target=ops.detach(target_projection),
    )


def pipeline_loss(
        params: Mapping[str, Node],
        batch: PairBatch,
        dims: EncoderDims,
        loss_config: CombinedLossConfig,
        target_params: Optional[EncoderParams] = None,
) -> Node:
    """
    배치 하나의 결합 손실

    v1(view_a)은 한 번만 인코딩해 두 항이 공유한다. 쓰이지 않는 항은
    인코딩하지 않는다.

    Args:
        params: 온라인 파라미터 노드 (리프 또는 상수)
        batch: 쌍 배치
        dims: 인코더 구조
        loss_config: 손실 설정
        target_params: BYOL target 파라미터 (없으면 온라인 값 복사)

    Returns:
        스칼라 손실 노드
    """
    target_nodes = None
    if dims.predictor:
        if target_params is None:
            target_params = {name: node.value for name, node in params.items() if not name.startswith("pred")}
        target_nodes = constant_params(target_params)

    anchor = encode_view(params, batch.view_a, dims, target_nodes)

    def _standard() -> Node:
        return pair_loss(anchor, encode_view(params, batch.view_b, dims, target_nodes), loss_config)

    def _context() -> Node:
        if batch.view_ctx is None:
            raise BatchException("contextual 항을 계산하려면 context 모드 배치가 필요합니다.")
        return pair_loss(anchor, encode_view(params, batch.view_ctx, dims, target_nodes), loss_config)

    return combined_loss(_context, _standard, loss_config.alpha)


def pretrain(
        dataset: SlideDataset,
        config: TrainConfig,
        on_epoch: Optional[EpochCallback] = None,
) -> PretrainResult:
    """
    SSL 사전학습

    같은 (config, seed)면 최종 파라미터가 비트 단위로 같다. α=0인 context
    학습은 같은 시드의 standard 학습과 손실 기록이 같다.

    Args:
        dataset: 학습 분할을 가진 데이터셋
        config: 학습 설정
        on_epoch: (epoch, 평균 손실) 콜백

    Returns:
        PretrainResult

    Raises:
        BatchException: 학습 슬라이드가 없을 때
        NonFiniteLossException: 손실이 NaN/Inf가 되었을 때
    """
    if not dataset.train:
        raise BatchException("학습 슬라이드가 1장 이상 필요합니다.")

    method = config.loss.method
    dims = dims_for(config, dataset.train[0].patch_shape)
    sampler_config = config.sampler.copy(update={"pivot_count": config.batch_size})
    batch_rng = make_rng(config.seed, 1)
    neighbor_rng = make_rng(config.seed, 2)

    params = init_params(config.seed, dims)
    target = {name: value.copy() for name, value in params.items() if not name.startswith("pred")}
    velocity: Optional[Dict[str, np.ndarray]] = None

    logger.info("=" * 80)
    logger.info(
        f"사전학습 시작: method={method.value}, sampling={sampler_config.mode.value}, "
        f"alpha={config.loss.alpha}, seed={config.seed}"
    )
    logger.info("=" * 80)

    epoch_losses: List[float] = []
    step_losses: List[float] = []
    step = 0
    for epoch in range(1, config.epochs + 1):
        losses = []
        for _ in range(config.steps_per_epoch):
            step += 1
            batch = build_batch(dataset.train, sampler_config, config.augment, batch_rng, neighbor_rng)
            leaves = {name: ops.leaf(value) for name, value in params.items()}
            loss = pipeline_loss(leaves, batch, dims, config.loss, target if dims.predictor else None)

            value = loss.item()
            if not np.isfinite(value):
                raise NonFiniteLossException(step=step, method=method.value, value=value, details={"epoch": epoch})

            grads = ops.backward(loss)
            named = {name: grads[node] for name, node in leaves.items() if node in grads}
            params, velocity = sgd_step(
                params, named, config.learning_rate, config.momentum, velocity, config.weight_decay
            )
            if dims.predictor:
                target = ema_update(target, params, config.loss.byol_tau)

            losses.append(value)
            logger.debug(f"step {step}: loss={value:.6f}")

        mean_loss = float(np.mean(losses))
        epoch_losses.append(mean_loss)
        step_losses.extend(losses)
        logger.info(f"epoch {epoch}/{config.epochs}: loss={mean_loss:.6f}")
        if on_epoch is not None:
            on_epoch(epoch, mean_loss)

    logger.info(f"✓ 사전학습 완료: 최종 loss={epoch_losses[-1]:.6f}")
    return PretrainResult(
        params=params,
        dims=dims,
        target_params=target,
        epoch_losses=epoch_losses,
        step_losses=step_losses,
    )
