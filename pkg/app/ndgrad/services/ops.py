"""
역전파 가능한 밀집 텐서 연산

모든 연산은 즉시(eager) 값을 계산하고, 출력 기울기를 받아 입력별 기울기를
돌려주는 backward 클로저를 노드에 붙인다. 입력 배열은 절대 수정하지 않는다.
"""
import logging
from typing import Dict, List, Optional, Sequence, Union

import numpy as np

from app.core.constants import Numerics
from app.core.exceptions import (
    DegenerateBatchException,
    DimensionException,
    InvalidAxisException,
    NormalizationException,
    RankException,
)
from app.ndgrad.models.node import BackwardFn, Node, Tensor, to_tensor

logger = logging.getLogger(__name__)

NodeLike = Union[Node, float, int, np.ndarray]


# =========================
# 노드 생성
# =========================
def leaf(value, requires_grad: bool = True) -> Node:
    """학습 대상(기울기 수집) 리프 노드"""
    return Node(to_tensor(value), op="leaf", requires_grad=requires_grad)


def constant(value) -> Node:
    """기울기를 받지 않는 상수 노드"""
    return Node(to_tensor(value), op="constant", requires_grad=False)


def detach(node: Node) -> Node:
    """값은 같고 그래프와 끊어진 상수 노드 (stop-gradient)"""
    return Node(node.value.copy(), op="detach", requires_grad=False)


def as_node(value: NodeLike) -> Node:
    return value if isinstance(value, Node) else constant(value)


def make_node(value: Tensor, inputs: Sequence[Node], op: str, backward: BackwardFn) -> Node:
    """
    사용자 정의 연산 노드 생성

    Args:
        value: 순전파 결과
        inputs: 입력 노드들
        op: 연산 이름
        backward: 출력 기울기 → 입력별 기울기 (입력 순서, 필요 없으면 None)

    Returns:
        그래프에 연결된 노드
    """
    return Node(value, inputs=inputs, op=op, backward=backward)


def _require_same_shape(kind: str, a: Node, b: Node) -> None:
    if a.shape != b.shape:
        raise DimensionException(
            f"{kind}: 두 입력의 shape가 다릅니다 {a.shape} vs {b.shape}",
            details={"op": kind, "left": list(a.shape), "right": list(b.shape)},
        )


def _check_axis(z: Node, axis: Optional[int]) -> None:
    if axis is None:
        return
    ndim = z.value.ndim
    if isinstance(axis, bool) or not isinstance(axis, (int, np.integer)) or not -ndim <= axis < ndim:
        raise InvalidAxisException(f"shape {z.shape}에 대해 유효하지 않은 축입니다: {axis}")


# =========================
# 행렬 연산
# =========================
def matmul(a: Node, b: Node) -> Node:
    """[m×k]·[k×n] → [m×n]"""
    if a.value.ndim != 2 or b.value.ndim != 2 or a.shape[1] != b.shape[0]:
        raise DimensionException(
            f"matmul: 내부 차원이 맞지 않습니다 {a.shape} · {b.shape}",
            details={"op": "matmul", "left": list(a.shape), "right": list(b.shape)},
        )
    a_value, b_value = a.value, b.value

    def _backward(g: Tensor):
        return g @ b_value.T, a_value.T @ g

    return make_node(a_value @ b_value, (a, b), "matmul", _backward)


def transpose(a: Node) -> Node:
    if a.value.ndim != 2:
        raise DimensionException(f"transpose는 2차원 텐서만 지원합니다: {a.shape}")
    return make_node(a.value.T.copy(), (a,), "transpose", lambda g: (g.T,))


def reshape(a: Node, shape: Sequence[int]) -> Node:
    original = a.shape
    try:
        value = a.value.reshape(tuple(shape))
    except ValueError:
        raise DimensionException(f"reshape: {original} → {tuple(shape)} 변환이 불가능합니다")
    return make_node(value.copy(), (a,), "reshape", lambda g: (g.reshape(original),))


def add_row(x: Node, row: Node) -> Node:
    """[N×D] 각 행에 [D] 벡터를 더한다 (편향 덧셈)"""
    if x.value.ndim != 2 or row.value.ndim != 1 or x.shape[1] != row.shape[0]:
        raise DimensionException(
            f"add_row: 행 벡터 shape가 맞지 않습니다 {x.shape} + {row.shape}",
            details={"op": "add_row", "left": list(x.shape), "right": list(row.shape)},
        )
    return make_node(x.value + row.value, (x, row), "add_row", lambda g: (g, g.sum(axis=0)))


# =========================
# 원소별 연산
# =========================
def add(a: Node, b: Node) -> Node:
    _require_same_shape("add", a, b)
    return make_node(a.value + b.value, (a, b), "add", lambda g: (g, g))


def sub(a: Node, b: Node) -> Node:
    _require_same_shape("sub", a, b)
    return make_node(a.value - b.value, (a, b), "sub", lambda g: (g, -g))


def mul(a: Node, b: Node) -> Node:
    _require_same_shape("mul", a, b)
    a_value, b_value = a.value, b.value
    return make_node(a_value * b_value, (a, b), "mul", lambda g: (g * b_value, g * a_value))


def scale(a: Node, factor: float) -> Node:
    factor = float(factor)
    return make_node(a.value * factor, (a,), "scale", lambda g: (g * factor,))


def add_scalar(a: Node, offset: float) -> Node:
    offset = float(offset)
    return make_node(a.value + offset, (a,), "add_scalar", lambda g: (g,))


def relu(a: Node) -> Node:
    # 0에서의 미분은 0
    mask = (a.value > 0.0).astype(np.float64)
    return make_node(a.value * mask, (a,), "relu", lambda g: (g * mask,))


def tanh(a: Node) -> Node:
    out = np.tanh(a.value)
    return make_node(out, (a,), "tanh", lambda g: (g * (1.0 - out * out),))


def square(a: Node) -> Node:
    a_value = a.value
    return make_node(a_value * a_value, (a,), "square", lambda g: (2.0 * g * a_value,))


def sqrt(a: Node) -> Node:
    """입력은 양수여야 한다 (호출 측에서 epsilon을 더해 보장)"""
    out = np.sqrt(a.value)
    return make_node(out, (a,), "sqrt", lambda g: (g * 0.5 / out,))


_UNARY = {"relu": relu, "tanh": tanh}
_BINARY = {"add": add, "mul": mul, "sub": sub}


def elementwise(kind: str, *args) -> Node:
    """
    원소별 연산 디스패치

    Args:
        kind: relu, tanh, add, mul, sub, scale 중 하나
        args: 단항은 (x,), 이항은 (a, b), scale은 (x, factor)

    Returns:
        결과 노드
    """
    if kind in _UNARY:
        (a,) = args
        return _UNARY[kind](as_node(a))
    if kind in _BINARY:
        a, b = args
        return _BINARY[kind](as_node(a), as_node(b))
    if kind == "scale":
        a, factor = args
        return scale(as_node(a), factor)
    raise ValueError(f"지원하지 않는 원소별 연산입니다: {kind}")


# =========================
# 축소 연산
# =========================
def _broadcast_back(g: Tensor, shape, axis: Optional[int]) -> Tensor:
    if axis is None:
        return np.full(shape, float(g.reshape(-1)[0]), dtype=np.float64)
    return np.broadcast_to(np.expand_dims(g, axis), shape).copy()


def reduce(kind: str, z: Node, axis: Optional[int] = None) -> Node:
    """
    합/평균 축소

    Args:
        kind: "sum" 또는 "mean"
        z: 입력 노드
        axis: None이면 전체를 스칼라로 축소

    Returns:
        축소된 노드 (axis=None이면 shape ())
    """
    _check_axis(z, axis)
    shape = z.shape
    if kind == "sum":
        value = np.sum(z.value, axis=axis)
        count = 1.0
    elif kind == "mean":
        value = np.mean(z.value, axis=axis)
        count = float(z.value.size if axis is None else shape[axis])
    else:
        raise ValueError(f"지원하지 않는 축소 연산입니다: {kind}")

    def _backward(g: Tensor):
        return (_broadcast_back(g, shape, axis) / count,)

    return make_node(np.asarray(value, dtype=np.float64), (z,), kind, _backward)


def reduce_sum(z: Node, axis: Optional[int] = None) -> Node:
    return reduce("sum", z, axis)


def reduce_mean(z: Node, axis: Optional[int] = None) -> Node:
    return reduce("mean", z, axis)


# =========================
# 정규화 연산
# =========================
def batch_standardize(z: Node, epsilon: float = Numerics.STANDARDIZE_EPSILON) -> Node:
    """
    열(column)별 표준화: 평균 0, 모표준편차 1

    표준편차가 epsilon 이하인 열은 0으로 채운다.

    Raises:
        DegenerateBatchException: 행(배치) 수가 2 미만일 때
    """
    if z.value.ndim != 2:
        raise DimensionException(f"batch_standardize는 [N×D] 입력만 지원합니다: {z.shape}")
    n = z.shape[0]
    if n < 2:
        raise DegenerateBatchException(f"배치 표준화에는 2개 이상의 행이 필요합니다 (N={n})")

    centered = z.value - z.value.mean(axis=0)
    std = np.sqrt(np.mean(centered * centered, axis=0))
    active = std > epsilon
    safe_std = np.where(active, std, 1.0)
    out = np.where(active, centered / safe_std, 0.0)

    def _backward(g: Tensor):
        inner = g - g.mean(axis=0) - out * np.mean(g * out, axis=0)
        return (np.where(active, inner / safe_std, 0.0),)

    return make_node(out, (z,), "batch_standardize", _backward)


def row_normalize(z: Node) -> Node:
    """
    행별 L2 정규화

    Raises:
        NormalizationException: 노름이 0인 행이 있을 때
    """
    if z.value.ndim != 2:
        raise DimensionException(f"row_normalize는 [N×D] 입력만 지원합니다: {z.shape}")
    norms = np.sqrt(np.sum(z.value * z.value, axis=1))
    zero_rows = np.flatnonzero(norms == 0.0)
    if zero_rows.size:
        raise NormalizationException(
            f"노름이 0인 행은 정규화할 수 없습니다: rows={zero_rows.tolist()}",
            details={"rows": zero_rows.tolist()},
        )
    out = z.value / norms[:, None]

    def _backward(g: Tensor):
        return ((g - out * np.sum(g * out, axis=1, keepdims=True)) / norms[:, None],)

    return make_node(out, (z,), "row_normalize", _backward)


def softmax(z: Node, axis: int) -> Node:
    _check_axis(z, axis)
    shifted = np.exp(z.value - np.max(z.value, axis=axis, keepdims=True))
    out = shifted / np.sum(shifted, axis=axis, keepdims=True)

    def _backward(g: Tensor):
        return (out * (g - np.sum(g * out, axis=axis, keepdims=True)),)

    return make_node(out, (z,), "softmax", _backward)


def log_softmax(z: Node, axis: int) -> Node:
    _check_axis(z, axis)
    shifted = z.value - np.max(z.value, axis=axis, keepdims=True)
    log_norm = np.log(np.sum(np.exp(shifted), axis=axis, keepdims=True))
    out = shifted - log_norm
    probs = np.exp(out)

    def _backward(g: Tensor):
        return (g - probs * np.sum(g, axis=axis, keepdims=True),)

    return make_node(out, (z,), "log_softmax", _backward)


def cross_entropy(logits: Node, labels: np.ndarray) -> Node:
    """
    소프트맥스 교차 엔트로피 (행 평균)

    Args:
        logits: [N×C] 점수
        labels: 길이 N의 정수 라벨

    Returns:
        스칼라 손실 노드
    """
    labels = np.asarray(labels, dtype=np.int64)
    if logits.value.ndim != 2 or labels.shape != (logits.shape[0],):
        raise DimensionException(f"cross_entropy: logits {logits.shape}와 labels {labels.shape}가 맞지 않습니다")
    one_hot = np.zeros(logits.shape, dtype=np.float64)
    one_hot[np.arange(labels.size), labels] = 1.0
    picked = reduce_sum(mul(log_softmax(logits, axis=1), constant(one_hot)))
    return scale(picked, -1.0 / labels.size)


# =========================
# 역전파
# =========================
def _topological_order(root: Node) -> List[Node]:
    """기울기가 필요한 노드만 후위 순회 순서로 나열"""
    order: List[Node] = []
    visited = set()
    stack = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in visited:
            continue
        visited.add(id(node))
        stack.append((node, True))
        for child in reversed(node.inputs):
            if child.requires_grad and id(child) not in visited:
                stack.append((child, False))
    return order


def backward(loss: Node) -> Dict[Node, Tensor]:
    """
    스칼라 손실에서 역전파

    호출할 때마다 그래프 안 노드의 기울기를 새로 계산하므로
    같은 그래프에 반복 호출해도 결과가 동일하다.

    Args:
        loss: 크기 1인 손실 노드

    Returns:
        리프 노드 → dLoss/dLeaf

    Raises:
        RankException: 손실이 스칼라가 아닐 때
    """
    if loss.value.size != 1:
        raise RankException(f"스칼라 손실만 역전파할 수 있습니다 (shape={loss.shape})")
    if not loss.requires_grad:
        logger.debug("기울기가 필요한 리프가 없는 손실입니다.")
        return {}

    order = _topological_order(loss)
    for node in order:
        node.grad = None

    pending: Dict[int, Tensor] = {id(loss): np.ones_like(loss.value)}
    for node in reversed(order):
        grad = pending.pop(id(node))
        node.grad = grad
        fn = node.backward_fn()
        if fn is None or node.is_leaf:
            continue
        for child, child_grad in zip(node.inputs, fn(grad)):
            if child_grad is None or not child.requires_grad:
                continue
            key = id(child)
            pending[key] = pending[key] + child_grad if key in pending else np.asarray(child_grad, dtype=np.float64)

    return {node: node.grad for node in order if node.is_leaf}
