"""
인코더 초기화, 순전파, 옵티마이저
"""
import logging
from typing import Dict, Mapping, Optional, Tuple

import numpy as np

from app.core.exceptions import DimensionException
from app.core.utils import hash_arrays, make_rng
from app.ndgrad.models.node import Node
from app.ndgrad.services import ops
from app.train.models.encoder import EncodedBatch, EncoderDims, EncoderParams

logger = logging.getLogger(__name__)


def init_params(seed: int, dims: EncoderDims) -> EncoderParams:
    """
    He-uniform 초기화: W ~ U(−√(6/fan_in), √(6/fan_in)), 편향 0

    레이어 순서대로 뽑으므로 predictor 유무와 관계없이 인코더/프로젝터 가중치는 같다.
    """
    rng = make_rng(seed, 0)
    params: EncoderParams = {}
    for name, fan_in, fan_out in dims.layers():
        bound = np.sqrt(6.0 / fan_in)
        params[f"{name}_w"] = rng.uniform(-bound, bound, size=(fan_in, fan_out))
        params[f"{name}_b"] = np.zeros(fan_out, dtype=np.float64)
    return params


def _dense(x: Node, params: Mapping[str, Node], name: str, activation: bool) -> Node:
    out = ops.add_row(ops.matmul(x, params[f"{name}_w"]), params[f"{name}_b"])
    return ops.relu(out) if activation else out


def flatten_images(images: np.ndarray, dims: EncoderDims) -> np.ndarray:
    images = np.asarray(images, dtype=np.float64)
    flat = images.reshape(images.shape[0], -1)
    if flat.shape[1] != dims.input_dim:
        raise DimensionException(
            f"이미지 차원({flat.shape[1]})이 인코더 입력 차원({dims.input_dim})과 다릅니다.",
            details={"images": list(images.shape), "input_dim": dims.input_dim},
        )
    return flat


def backbone_forward(params: Mapping[str, Node], x: Node, dims: EncoderDims) -> Node:
    """은닉층 relu, 임베딩층은 선형"""
    layers = dims.encoder_layers()
    for index, (name, _, _) in enumerate(layers):
        x = _dense(x, params, name, activation=index < len(layers) - 1)
    return x


def projector_forward(params: Mapping[str, Node], embedding: Node) -> Node:
    hidden = _dense(embedding, params, "proj0", activation=True)
    return _dense(hidden, params, "proj1", activation=False)


def predictor_forward(params: Mapping[str, Node], projection: Node) -> Node:
    return _dense(projection, params, "pred0", activation=False)


def encoder_forward(params: Mapping[str, Node], x: Node, dims: EncoderDims) -> Tuple[Node, Node]:
    """(임베딩, projection) 노드"""
    embedding = backbone_forward(params, x, dims)
    return embedding, projector_forward(params, embedding)


def constant_params(params: EncoderParams) -> Dict[str, Node]:
    return {name: ops.constant(value) for name, value in params.items()}


def encode(params: EncoderParams, images: np.ndarray, dims: EncoderDims) -> EncodedBatch:
    """
    고정된 파라미터로 순전파 (기울기 없음)

    Args:
        params: 인코더 파라미터
        images: (N, H, W, C) 또는 (N, H·W·C)
        dims: 인코더 구조

    Returns:
        EncodedBatch (embedding [N×32], projection [N×16])
    """
    x = ops.constant(flatten_images(images, dims))
    embedding, projection = encoder_forward(constant_params(params), x, dims)
    return EncodedBatch(embedding=embedding.value, projection=projection.value)


def _check_shapes(kind: str, left: Mapping[str, np.ndarray], right: Mapping[str, np.ndarray]) -> None:
    for name, value in left.items():
        if name not in right or np.shape(right[name]) != np.shape(value):
            raise DimensionException(
                f"{kind}: 파라미터 '{name}'의 shape가 맞지 않습니다.",
                details={"param": name, "expected": list(np.shape(value))},
            )


def sgd_step(
        params: EncoderParams,
        grads: Mapping[str, np.ndarray],
        lr: float,
        momentum: float,
        velocity: Optional[Mapping[str, np.ndarray]] = None,
        weight_decay: float = 0.0,
) -> Tuple[EncoderParams, Dict[str, np.ndarray]]:
    """
    SGD + momentum

    velocity ← momentum·velocity + (grad + weight_decay·param)
    param ← param − lr·velocity

    기울기가 없는 파라미터는 기울기 0으로 본다. 입력 배열은 수정하지 않는다.
    """
    velocity = velocity if velocity is not None else {name: np.zeros_like(value) for name, value in params.items()}
    _check_shapes("sgd_step", params, velocity)
    present = {name: grad for name, grad in grads.items() if name in params}
    for name, grad in present.items():
        if np.shape(grad) != params[name].shape:
            raise DimensionException(f"sgd_step: 기울기 '{name}'의 shape가 파라미터와 다릅니다.")

    new_params: EncoderParams = {}
    new_velocity: Dict[str, np.ndarray] = {}
    for name, value in params.items():
        grad = present.get(name)
        grad = np.zeros_like(value) if grad is None else np.asarray(grad, dtype=np.float64)
        if weight_decay:
            grad = grad + weight_decay * value
        new_velocity[name] = momentum * velocity[name] + grad
        new_params[name] = value - lr * new_velocity[name]
    return new_params, new_velocity


def ema_update(target: Mapping[str, np.ndarray], online: Mapping[str, np.ndarray], tau: float) -> Dict[str, np.ndarray]:
    """target ← τ·target + (1−τ)·online (target에 있는 파라미터만)"""
    _check_shapes("ema_update", target, online)
    return {name: tau * value + (1.0 - tau) * online[name] for name, value in target.items()}


def params_hash(params: Mapping[str, np.ndarray]) -> str:
    return hash_arrays(params)
