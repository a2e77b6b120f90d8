"""
Attention 기반 MIL (ABMIL) 슬라이드 분류

aₖ = softmax_k(wᵀ·tanh(V·hₖ)), bag 임베딩 = Σₖ aₖ·hₖ, 점수 = W·bag + b.
인코더 임베딩은 입력일 뿐이며 학습되지 않는다.
"""
import logging
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from sklearn.preprocessing import StandardScaler

from app.core.exceptions import EmptyBagException, SingleClassException
from app.core.utils import make_rng
from app.eval.models.classifier import Bag, EvalResult, MILParams
from app.eval.schema.schemas import EvalConfig
from app.eval.services.metrics import accuracy, macro_auroc, softmax_rows
from app.ndgrad.models.node import Node
from app.ndgrad.services import ops
from app.slidegen.models.slide import VirtualSlide
from app.train.models.encoder import EncoderDims, EncoderParams
from app.train.services.encoder_service import encode, sgd_step

logger = logging.getLogger(__name__)


def build_bags(params: EncoderParams, dims: EncoderDims, slides: Sequence[VirtualSlide]) -> List[Bag]:
    """슬라이드의 모든 패치를 고정 인코더로 임베딩해 bag 생성"""
    bags = []
    for slide in slides:
        flat = slide.patches.reshape(slide.patch_count, *slide.patch_shape)
        bags.append(Bag(
            slide_id=slide.slide_id,
            instances=encode(params, flat, dims).embedding,
            slide_label=int(slide.slide_label),
        ))
    return bags


def init_mil_params(seed: int, input_dim: int, hidden: int, num_classes: int) -> MILParams:
    rng = make_rng(seed, 10)
    bound_in = np.sqrt(6.0 / input_dim)
    bound_hidden = np.sqrt(6.0 / hidden)
    return MILParams(
        V=rng.uniform(-bound_in, bound_in, size=(hidden, input_dim)),
        w=rng.uniform(-bound_hidden, bound_hidden, size=hidden),
        W=rng.uniform(-bound_in, bound_in, size=(num_classes, input_dim)),
        b=np.zeros(num_classes, dtype=np.float64),
    )


def abmil_graph(params: Dict[str, Node], instances: np.ndarray) -> Tuple[Node, Node]:
    """
    ABMIL 순전파 그래프

    Returns:
        (점수 [1×C], attention [1×N])

    Raises:
        EmptyBagException: 인스턴스가 없을 때
    """
    instances = np.asarray(instances, dtype=np.float64)
    if instances.ndim != 2 or instances.shape[0] == 0:
        raise EmptyBagException(f"bag에 인스턴스가 없습니다 (shape={instances.shape})")
    h = ops.constant(instances)
    hidden = ops.tanh(ops.matmul(h, ops.transpose(params["V"])))
    logits = ops.reshape(ops.matmul(hidden, ops.reshape(params["w"], (-1, 1))), (1, instances.shape[0]))
    attention = ops.softmax(logits, axis=1)
    bag_embedding = ops.matmul(attention, h)
    scores = ops.add_row(ops.matmul(bag_embedding, ops.transpose(params["W"])), params["b"])
    return scores, attention


def abmil_forward(params: MILParams, bag: Bag) -> Tuple[np.ndarray, np.ndarray]:
    """(클래스 점수 [C], attention 가중치 [N])"""
    nodes = {name: ops.constant(value) for name, value in params.to_dict().items()}
    scores, attention = abmil_graph(nodes, bag.instances)
    return scores.value[0], attention.value[0]


def _predict(params: MILParams, bags: Sequence[Bag], scaler: StandardScaler) -> np.ndarray:
    logits = np.stack([
        abmil_forward(params, Bag(bag.slide_id, scaler.transform(bag.instances), bag.slide_label))[0]
        for bag in bags
    ])
    return softmax_rows(logits)


def _split_metrics(params: MILParams, bags: Sequence[Bag], scaler: StandardScaler) -> Tuple[float, Optional[float]]:
    probabilities = _predict(params, bags, scaler)
    labels = np.array([bag.slide_label for bag in bags])
    acc = accuracy(probabilities.argmax(axis=1), labels)
    auc = macro_auroc(probabilities, labels) if np.unique(labels).size >= 2 else None
    return acc, auc


def train_mil(
        train_bags: Sequence[Bag],
        config: EvalConfig,
        seed: int,
        val_bags: Optional[Sequence[Bag]] = None,
        test_bags: Optional[Sequence[Bag]] = None,
) -> EvalResult:
    """
    bag 단위 SGD로 ABMIL 학습

    인스턴스 특징은 학습 bag 전체로 맞춘 StandardScaler로 표준화한다.
    검증 bag이 있으면 검증 정확도가 가장 높은 에폭의 파라미터를 쓴다.

    Args:
        train_bags: 학습 bag
        config: 평가 설정
        seed: 시드
        val_bags: 모델 선택용 검증 bag
        test_bags: 최종 지표용 테스트 bag

    Returns:
        EvalResult (params: MILParams)

    Raises:
        SingleClassException: 학습 bag의 클래스가 하나뿐일 때
        EmptyBagException: 빈 bag
    """
    if not train_bags:
        raise SingleClassException("학습 bag이 없습니다.")
    for bag in list(train_bags) + list(val_bags or []) + list(test_bags or []):
        if bag.size == 0:
            raise EmptyBagException(f"빈 bag입니다: slide_id={bag.slide_id}")

    labels = np.array([bag.slide_label for bag in train_bags])
    if np.unique(labels).size < 2:
        raise SingleClassException(
            f"학습 bag의 클래스가 하나뿐입니다: {int(labels[0])}",
            details={"label": int(labels[0])},
        )
    rng = make_rng(seed, 11)
    if config.shuffle_labels:
        labels = rng.permutation(labels)

    scaler = StandardScaler().fit(np.concatenate([bag.instances for bag in train_bags]))
    inputs = [scaler.transform(bag.instances) for bag in train_bags]

    params = init_mil_params(seed, train_bags[0].instances.shape[1], config.mil_hidden, config.num_classes)
    velocity = None
    best = (params, -1.0, 0)
    losses: List[float] = []

    logger.info(f"ABMIL 학습 시작: bags={len(train_bags)}, epochs={config.mil_epochs}, seed={seed}")
    for epoch in range(1, config.mil_epochs + 1):
        epoch_losses = []
        for index in rng.permutation(len(train_bags)):
            leaves = {name: ops.leaf(value) for name, value in params.to_dict().items()}
            scores, _ = abmil_graph(leaves, inputs[index])
            loss = ops.cross_entropy(scores, np.array([labels[index]]))
            grads = ops.backward(loss)
            named = {name: grads[node] for name, node in leaves.items() if node in grads}
            updated, velocity = sgd_step(
                params.to_dict(), named, config.mil_learning_rate, config.mil_momentum, velocity,
                config.mil_weight_decay,
            )
            params = MILParams.from_dict(updated)
            epoch_losses.append(loss.item())
        losses.append(float(np.mean(epoch_losses)))

        if val_bags:
            val_acc, _ = _split_metrics(params, val_bags, scaler)
            if val_acc > best[1]:
                best = (params, val_acc, epoch)
        logger.debug(f"ABMIL epoch {epoch}: loss={losses[-1]:.6f}")

    if val_bags:
        params, val_accuracy, best_epoch = best
    else:
        val_accuracy, best_epoch = None, config.mil_epochs

    train_probs = _predict(params, train_bags, scaler)
    train_accuracy = accuracy(train_probs.argmax(axis=1), labels)
    test_accuracy, test_auroc = (None, None)
    if test_bags:
        test_accuracy, test_auroc = _split_metrics(params, test_bags, scaler)

    logger.info(
        f"✓ ABMIL 학습 완료: best_epoch={best_epoch}, train_acc={train_accuracy:.3f}, "
        f"val_acc={val_accuracy}, test_acc={test_accuracy}"
    )
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
