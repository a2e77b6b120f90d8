"""
패치 수준 평가: 고정 인코더 선형 프로빙과 지도학습 기준선
"""
import logging
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from sklearn.preprocessing import StandardScaler

from app.core.exceptions import FrozenEncoderException, MissingClassException, SingleClassException
from app.core.utils import make_rng
from app.eval.models.classifier import EvalResult, ProbeParams
from app.eval.schema.schemas import EvalConfig
from app.eval.services.metrics import accuracy, macro_auroc, softmax_rows
from app.ndgrad.models.node import Node
from app.ndgrad.services import ops
from app.slidegen.models.slide import SlideDataset, VirtualSlide
from app.train.models.encoder import EncoderDims, EncoderParams
from app.train.services.encoder_service import backbone_forward, encode, init_params, params_hash, sgd_step

logger = logging.getLogger(__name__)

Split = Tuple[np.ndarray, np.ndarray]


def sample_probe_patches(
        slides: Sequence[VirtualSlide],
        per_class: int,
        rng: np.random.Generator,
        num_classes: int = 3,
) -> Split:
    """
    클래스별 같은 수의 패치 샘플링

    한 클래스의 패치가 per_class보다 적으면 중복 허용으로 뽑는다.

    Returns:
        (패치 [N×H×W×C], 라벨 [N]), 클래스 순서로 정렬

    Raises:
        MissingClassException: 패치가 하나도 없는 클래스가 있을 때
    """
    coords_by_class: Dict[int, List[Tuple[int, int, int]]] = {c: [] for c in range(num_classes)}
    for index, slide in enumerate(slides):
        for row, col in np.ndindex(slide.rows, slide.cols):
            coords_by_class[int(slide.labels[row, col])].append((index, row, col))

    patches, labels = [], []
    for tissue_class in range(num_classes):
        coords = coords_by_class[tissue_class]
        if not coords:
            raise MissingClassException(
                f"클래스 {tissue_class}의 패치가 없습니다.",
                details={"class": tissue_class},
            )
        replace = len(coords) < per_class
        if replace:
            logger.warning(f"클래스 {tissue_class} 패치가 {len(coords)}개뿐이라 중복 허용으로 {per_class}개를 뽑습니다.")
        chosen = rng.choice(len(coords), size=per_class, replace=replace)
        for pick in chosen:
            index, row, col = coords[pick]
            patches.append(slides[index].patch(row, col))
            labels.append(tissue_class)
    return np.stack(patches), np.array(labels, dtype=np.int64)


def init_probe_params(seed: int, input_dim: int, num_classes: int) -> ProbeParams:
    rng = make_rng(seed, 20)
    bound = np.sqrt(6.0 / input_dim)
    return ProbeParams(
        W=rng.uniform(-bound, bound, size=(num_classes, input_dim)),
        b=np.zeros(num_classes, dtype=np.float64),
    )


def _linear(x: Node, params: Dict[str, Node]) -> Node:
    return ops.add_row(ops.matmul(x, ops.transpose(params["W"])), params["b"])


def _probe_logits(params: ProbeParams, features: np.ndarray) -> np.ndarray:
    return features @ params.W.T + params.b


def _metrics(logits: np.ndarray, labels: np.ndarray) -> Tuple[float, Optional[float]]:
    probabilities = softmax_rows(logits)
    acc = accuracy(probabilities.argmax(axis=1), labels)
    auc = macro_auroc(probabilities, labels) if np.unique(labels).size >= 2 else None
    return acc, auc


def _check_classes(labels: np.ndarray, num_classes: int) -> None:
    present = set(np.unique(labels).tolist())
    if len(present) < 2:
        raise SingleClassException("학습 데이터에 클래스가 하나뿐입니다.")
    missing = sorted(set(range(num_classes)) - present)
    if missing:
        raise MissingClassException(f"학습 데이터에 없는 클래스가 있습니다: {missing}", details={"missing": missing})


def train_linear_probe(
        train: Split,
        config: EvalConfig,
        seed: int,
        val: Optional[Split] = None,
        test: Optional[Split] = None,
) -> EvalResult:
    """
    고정 임베딩 위 softmax 선형 분류기 학습 (미니배치 SGD)

    Args:
        train: (임베딩 [N×D], 라벨)
        config: 평가 설정
        seed: 시드
        val: 모델 선택용 검증 분할
        test: 최종 지표용 테스트 분할

    Returns:
        EvalResult (params: ProbeParams)

    Raises:
        MissingClassException: 학습 라벨에 없는 클래스가 있을 때
    """
    features, labels = np.asarray(train[0], dtype=np.float64), np.asarray(train[1], dtype=np.int64)
    _check_classes(labels, config.num_classes)
    rng = make_rng(seed, 21)
    if config.shuffle_labels:
        labels = rng.permutation(labels)

    scaler = StandardScaler().fit(features)
    x_train = scaler.transform(features)
    params = init_probe_params(seed, x_train.shape[1], config.num_classes)
    velocity = None
    best = (params, -1.0, 0)
    losses: List[float] = []

    for epoch in range(1, config.probe_epochs + 1):
        order = rng.permutation(len(labels))
        epoch_losses = []
        for start in range(0, len(order), config.probe_batch_size):
            index = order[start:start + config.probe_batch_size]
            leaves = {name: ops.leaf(value) for name, value in params.to_dict().items()}
            loss = ops.cross_entropy(_linear(ops.constant(x_train[index]), leaves), labels[index])
            grads = ops.backward(loss)
            updated, velocity = sgd_step(
                params.to_dict(), {name: grads[node] for name, node in leaves.items()},
                config.probe_learning_rate, config.probe_momentum, velocity, config.probe_weight_decay,
            )
            params = ProbeParams.from_dict(updated)
            epoch_losses.append(loss.item())
        losses.append(float(np.mean(epoch_losses)))

        if val is not None:
            val_acc = accuracy(_probe_logits(params, scaler.transform(val[0])).argmax(axis=1), val[1])
            if val_acc > best[1]:
                best = (params, val_acc, epoch)

    if val is not None:
        params, val_accuracy, best_epoch = best
    else:
        val_accuracy, best_epoch = None, config.probe_epochs

    train_accuracy = accuracy(_probe_logits(params, x_train).argmax(axis=1), labels)
    test_accuracy, test_auroc = (None, None)
    if test is not None:
        test_accuracy, test_auroc = _metrics(_probe_logits(params, scaler.transform(test[0])), np.asarray(test[1]))

    logger.info(f"✓ 선형 프로빙 완료: best_epoch={best_epoch}, val_acc={val_accuracy}, test_acc={test_accuracy}")
    return EvalResult(
        params=params,
        train_accuracy=train_accuracy,
        val_accuracy=val_accuracy,
        test_accuracy=test_accuracy,
        test_auroc=test_auroc,
        best_epoch=best_epoch,
        losses=losses,
        scaler=scaler,
    )


def probe_splits(dataset: SlideDataset, config: EvalConfig, seed: int) -> Dict[str, Split]:
    """분할별 클래스 균형 패치 샘플 (train/val/test)"""
    rng = make_rng(seed, 22)
    per_class = {
        "train": config.probe_train_per_class,
        "val": config.probe_val_per_class,
        "test": config.probe_test_per_class,
    }
    return {
        name: sample_probe_patches(dataset.split(name), count, rng, config.num_classes)
        for name, count in per_class.items()
    }


def run_linear_probe(
        encoder_params: EncoderParams,
        dims: EncoderDims,
        dataset: SlideDataset,
        config: EvalConfig,
        seed: int,
) -> EvalResult:
    """
    고정 인코더 임베딩으로 선형 프로빙

    프로빙 전후 인코더 파라미터 해시가 같아야 한다.

    Raises:
        FrozenEncoderException: 인코더 파라미터가 변경되었을 때
    """
    before = params_hash(encoder_params)
    splits = probe_splits(dataset, config, seed)
    embedded = {name: (encode(encoder_params, patches, dims).embedding, labels)
                for name, (patches, labels) in splits.items()}
    result = train_linear_probe(embedded["train"], config, seed, val=embedded["val"], test=embedded["test"])
    after = params_hash(encoder_params)
    if before != after:
        raise FrozenEncoderException(details={"before": before, "after": after})
    return result


def train_supervised_baseline(
        dataset: SlideDataset,
        config: EvalConfig,
        seed: int,
        dims: Optional[EncoderDims] = None,
) -> EvalResult:
    """
    같은 퍼셉트론 백본 + 선형 헤드를 패치 라벨로 처음부터 학습

    Returns:
        EvalResult (params: {"encoder": EncoderParams, "head": ProbeParams})
    """
    splits = probe_splits(dataset, config, seed)
    patches, labels = splits["train"]
    labels = labels.copy()
    _check_classes(labels, config.num_classes)
    rng = make_rng(seed, 23)
    if config.shuffle_labels:
        labels = rng.permutation(labels)

    dims = dims or EncoderDims(input_dim=int(np.prod(patches.shape[1:])))
    x_train = patches.reshape(len(patches), -1).astype(np.float64)
    params = {name: value for name, value in init_params(seed, dims).items() if name.startswith("enc")}
    head = init_probe_params(seed, dims.embedding_dim, config.num_classes).to_dict()
    params.update({f"head_{name}": value for name, value in head.items()})
    velocity = None

    def _logits(values: Dict[str, np.ndarray], images: np.ndarray) -> np.ndarray:
        nodes = {name: ops.constant(value) for name, value in values.items()}
        return _forward(nodes, images).value

    def _forward(nodes: Dict[str, Node], images: np.ndarray) -> Node:
        embedding = backbone_forward(nodes, ops.constant(images.reshape(len(images), -1)), dims)
        return _linear(embedding, {"W": nodes["head_W"], "b": nodes["head_b"]})

    best = (params, -1.0, 0)
    losses: List[float] = []
    logger.info(f"지도학습 기준선 학습 시작: patches={len(labels)}, seed={seed}")
    for epoch in range(1, config.supervised_epochs + 1):
        order = rng.permutation(len(labels))
        epoch_losses = []
        for start in range(0, len(order), config.supervised_batch_size):
            index = order[start:start + config.supervised_batch_size]
            leaves = {name: ops.leaf(value) for name, value in params.items()}
            loss = ops.cross_entropy(_forward(leaves, x_train[index]), labels[index])
            grads = ops.backward(loss)
            params, velocity = sgd_step(
                params, {name: grads[node] for name, node in leaves.items() if node in grads},
                config.supervised_learning_rate, config.supervised_momentum, velocity,
            )
            epoch_losses.append(loss.item())
        losses.append(float(np.mean(epoch_losses)))

        val_acc = accuracy(_logits(params, splits["val"][0]).argmax(axis=1), splits["val"][1])
        if val_acc > best[1]:
            best = (params, val_acc, epoch)

    params, val_accuracy, best_epoch = best
    train_accuracy = accuracy(_logits(params, x_train).argmax(axis=1), labels)
    test_accuracy, test_auroc = _metrics(_logits(params, splits["test"][0]), splits["test"][1])
    logger.info(f"✓ 지도학습 기준선 완료: best_epoch={best_epoch}, test_acc={test_accuracy:.3f}")
    return EvalResult(
        params={
            "encoder": {name: value for name, value in params.items() if name.startswith("enc")},
            "head": ProbeParams(W=params["head_W"], b=params["head_b"]),
        },
        train_accuracy=train_accuracy,
        val_accuracy=val_accuracy,
        test_accuracy=test_accuracy,
        test_auroc=test_auroc,
        best_epoch=best_epoch,
        losses=losses,
    )
