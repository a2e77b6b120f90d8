import numpy as np
import pytest

from app.core.exceptions import (
    DegenerateBatchException,
    DimensionException,
    InvalidAxisException,
    NonFiniteValueException,
    NormalizationException,
    RankException,
)
from app.ndgrad.services import ops
from app.ndgrad.services.gradient_check import grad_check


def _brute_matmul(a, b):
    out = np.zeros((a.shape[0], b.shape[1]))
    for i in range(a.shape[0]):
        for j in range(b.shape[1]):
            out[i, j] = sum(a[i, k] * b[k, j] for k in range(a.shape[1]))
    return out


@pytest.mark.parametrize("seed", range(5))
def test_matmul_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(4, 3))
    b = rng.normal(size=(3, 5))
    out = ops.matmul(ops.constant(a), ops.constant(b)).value
    assert np.max(np.abs(out - _brute_matmul(a, b))) < 1e-10


def test_matmul_dimension_error_names_shapes():
    with pytest.raises(DimensionException) as exc_info:
        ops.matmul(ops.constant(np.ones((2, 3))), ops.constant(np.ones((2, 3))))
    assert exc_info.value.details["left"] == [2, 3]
    assert exc_info.value.details["right"] == [2, 3]


def test_batch_standardize_matches_brute_force(rng):
    z = rng.normal(2.0, 3.0, size=(10, 4))
    out = ops.batch_standardize(ops.constant(z)).value
    expected = (z - z.mean(axis=0)) / z.std(axis=0)
    assert np.max(np.abs(out - expected)) < 1e-10
    assert np.allclose(out.mean(axis=0), 0.0)
    assert np.allclose(out.std(axis=0), 1.0)


def test_batch_standardize_zeroes_constant_columns(rng):
    z = rng.normal(size=(6, 3))
    z[:, 1] = 4.2
    out = ops.batch_standardize(ops.constant(z)).value
    assert np.all(out[:, 1] == 0.0)


def test_batch_standardize_rejects_single_row():
    with pytest.raises(DegenerateBatchException):
        ops.batch_standardize(ops.constant(np.ones((1, 3))))


def test_backward_requires_scalar_loss():
    x = ops.leaf(np.ones((2, 2)))
    with pytest.raises(RankException):
        ops.backward(ops.scale(x, 2.0))


def test_invalid_axis():
    with pytest.raises(InvalidAxisException):
        ops.reduce_sum(ops.leaf(np.ones((2, 2))), axis=2)


def test_row_normalize_zero_row():
    with pytest.raises(NormalizationException):
        ops.row_normalize(ops.constant(np.array([[1.0, 0.0], [0.0, 0.0]])))


def test_elementwise_dispatch():
    a = ops.constant(np.array([[-1.0, 2.0]]))
    assert np.array_equal(ops.elementwise("relu", a).value, [[0.0, 2.0]])
    assert np.array_equal(ops.elementwise("scale", a, 3.0).value, [[-3.0, 6.0]])
    with pytest.raises(ValueError):
        ops.elementwise("cube", a)


def test_shared_input_accumulates_gradient(rng):
    value = rng.normal(size=(3, 2))
    x = ops.leaf(value)
    grads = ops.backward(ops.reduce_sum(ops.mul(x, x)))
    assert np.allclose(grads[x], 2.0 * value)


def test_detach_stops_gradient(rng):
    value = rng.normal(size=(3, 2))
    x = ops.leaf(value)
    grads = ops.backward(ops.reduce_sum(ops.mul(x, ops.detach(x))))
    assert np.allclose(grads[x], value)


def test_backward_is_repeatable(rng):
    x = ops.leaf(rng.normal(size=(4, 3)))
    loss = ops.reduce_mean(ops.tanh(ops.matmul(x, ops.constant(rng.normal(size=(3, 2))))))
    first = ops.backward(loss)[x].copy()
    second = ops.backward(loss)[x]
    assert np.array_equal(first, second)


def test_backward_without_leaves_returns_empty():
    assert ops.backward(ops.reduce_sum(ops.constant(np.ones(3)))) == {}


def test_inputs_are_not_mutated(rng):
    value = rng.normal(size=(4, 3))
    original = value.copy()
    x = ops.leaf(value)
    ops.backward(ops.reduce_sum(ops.batch_standardize(x)))
    assert np.array_equal(value, original)


@pytest.mark.parametrize("seed", range(10))
def test_grad_check_composite_graph(seed):
    rng = np.random.default_rng(seed)
    w = ops.constant(rng.normal(size=(3, 4)))
    weights = ops.constant(rng.normal(size=(5, 4)))

    def f(x):
        hidden = ops.tanh(ops.matmul(x, w))
        normalized = ops.batch_standardize(hidden)
        return ops.reduce_sum(ops.mul(normalized, weights))

    assert grad_check(f, rng.normal(size=(5, 3))) < 1e-6


@pytest.mark.parametrize("seed", range(10))
def test_grad_check_softmax_and_cross_entropy(seed):
    rng = np.random.default_rng(seed)
    labels = rng.integers(0, 3, size=6)
    weights = ops.constant(rng.normal(size=(6, 3)))

    def f(x):
        ce = ops.cross_entropy(x, labels)
        soft = ops.reduce_sum(ops.mul(ops.softmax(x, axis=1), weights))
        return ops.add(ce, soft)

    assert grad_check(f, rng.normal(size=(6, 3))) < 1e-6


@pytest.mark.parametrize("seed", range(10))
def test_grad_check_row_normalize(seed):
    rng = np.random.default_rng(seed)
    weights = ops.constant(rng.normal(size=(4, 5)))

    def f(x):
        return ops.reduce_sum(ops.mul(ops.row_normalize(x), weights))

    assert grad_check(f, rng.normal(size=(4, 5))) < 1e-6


def test_grad_check_subset_of_coordinates(rng):
    def f(x):
        return ops.reduce_sum(ops.square(x))

    assert grad_check(f, rng.normal(size=(20, 20)), max_coords=15, rng=rng) < 1e-8


def test_grad_check_rejects_non_finite():
    def f(x):
        return ops.reduce_sum(ops.sqrt(x))

    with np.errstate(invalid="ignore", divide="ignore"):
        with pytest.raises(NonFiniteValueException):
            grad_check(f, -np.ones(3))


def test_grad_check_rejects_non_positive_step():
    with pytest.raises(ValueError):
        grad_check(lambda x: ops.reduce_sum(x), np.ones(2), step=0.0)


# ===== 연산별 기울기 검증 =====

def _away_from_zero(rng, shape, offset=0.1):
    raw = rng.normal(size=shape)
    return np.sign(raw) * (offset + np.abs(raw))


def _scalarized(op, x, rng):
    """출력에 고정된 임의 가중치를 곱해 합한 스칼라 함수"""
    shape = op(ops.constant(x)).shape
    weights = ops.constant(rng.normal(size=shape))

    def f(node):
        out = op(node)
        return ops.reduce_sum(ops.mul(out, weights)) if out.value.ndim else ops.mul(out, weights)

    return f


def _case(op, sample=lambda rng: rng.normal(size=(4, 3))):
    def build(rng):
        x = sample(rng)
        return _scalarized(op, x, rng), x

    return build


def _with_constant(op, shape, left=True):
    def build(rng):
        other = ops.constant(rng.normal(size=shape))
        x = rng.normal(size=(4, 3))
        return _scalarized(lambda node: op(node, other) if left else op(other, node), x, rng), x

    return build


OPERATION_CASES = {
    "relu": _case(ops.relu, lambda rng: _away_from_zero(rng, (4, 3))),
    "tanh": _case(ops.tanh),
    "sqrt": _case(ops.sqrt, lambda rng: 0.5 + np.abs(rng.normal(size=(4, 3)))),
    "square": _case(ops.square),
    "scale": _case(lambda node: ops.scale(node, -1.7)),
    "add_scalar": _case(lambda node: ops.add_scalar(node, 0.3)),
    "sum_all": _case(ops.reduce_sum),
    "sum_rows": _case(lambda node: ops.reduce_sum(node, axis=0)),
    "sum_cols": _case(lambda node: ops.reduce_sum(node, axis=1)),
    "mean_all": _case(ops.reduce_mean),
    "mean_rows": _case(lambda node: ops.reduce_mean(node, axis=0)),
    "mean_cols": _case(lambda node: ops.reduce_mean(node, axis=-1)),
    "transpose": _case(ops.transpose),
    "reshape": _case(lambda node: ops.reshape(node, (2, 6))),
    "batch_standardize": _case(ops.batch_standardize),
    "row_normalize": _case(ops.row_normalize),
    "softmax_rows": _case(lambda node: ops.softmax(node, axis=1)),
    "softmax_cols": _case(lambda node: ops.softmax(node, axis=0)),
    "log_softmax": _case(lambda node: ops.log_softmax(node, axis=1)),
    "cross_entropy": _case(lambda node: ops.cross_entropy(node, np.array([0, 2, 1, 2]))),
    "matmul_left": _with_constant(ops.matmul, (3, 5)),
    "matmul_right": _with_constant(ops.matmul, (2, 4), left=False),
    "add_row_matrix": _with_constant(ops.add_row, (3,)),
    "add": _with_constant(ops.add, (4, 3)),
    "sub_left": _with_constant(ops.sub, (4, 3)),
    "sub_right": _with_constant(ops.sub, (4, 3), left=False),
    "mul": _with_constant(ops.mul, (4, 3)),
}


def test_add_row_vector_gradient(rng):
    matrix = ops.constant(rng.normal(size=(5, 3)))
    weights = ops.constant(rng.normal(size=(5, 3)))
    assert grad_check(lambda row: ops.reduce_sum(ops.mul(ops.add_row(matrix, row), weights)),
                      rng.normal(size=3)) < 1e-6


@pytest.mark.parametrize("seed", range(100))
@pytest.mark.parametrize("name", sorted(OPERATION_CASES))
def test_operation_gradient(name, seed):
    f, x = OPERATION_CASES[name](np.random.default_rng(seed))
    assert grad_check(f, x) < 1e-4


def _wrong_square(x):
    value = x.value
    return ops.make_node(value * value, (x,), "wrong_square", lambda g: (3.0 * g * value,))


def test_grad_check_flags_wrong_gradient(rng):
    assert grad_check(lambda x: ops.reduce_sum(_wrong_square(x)), _away_from_zero(rng, (3, 2))) > 1e-2


def test_grad_check_linear_function_is_exact(rng):
    weights = ops.constant(rng.normal(size=(4, 3)))
    assert grad_check(lambda x: ops.reduce_sum(ops.mul(x, weights)), rng.normal(size=(4, 3))) < 1e-9


def test_grad_check_sum_of_tanh(rng):
    assert grad_check(lambda x: ops.reduce_sum(ops.tanh(x)), rng.normal(size=(6, 2))) < 1e-6


# ===== 정확한 값 =====

def test_sum_gradient_is_all_ones(rng):
    x = ops.leaf(rng.normal(size=(3, 4)))
    grads = ops.backward(ops.reduce_sum(x))
    assert np.array_equal(grads[x], np.ones((3, 4)))


def test_sum_and_mean_values():
    assert ops.reduce_sum(ops.constant([1.0, 2.0, 3.0])).item() == 6.0
    assert ops.reduce_mean(ops.constant(np.full((3, 4), 2.5))).item() == 2.5


def test_tanh_at_zero():
    x = ops.leaf(np.zeros(3))
    out = ops.tanh(x)
    assert np.array_equal(out.value, np.zeros(3))
    assert np.array_equal(ops.backward(ops.reduce_sum(out))[x], np.ones(3))


def test_square_gradient_at_three():
    x = ops.leaf(np.array(3.0))
    assert ops.backward(ops.square(x))[x] == 6.0


def test_dot_product_gradient_is_input(rng):
    value = rng.normal(size=(1, 4))
    w = ops.leaf(rng.normal(size=(1, 4)))
    grads = ops.backward(ops.reduce_sum(ops.mul(w, ops.constant(value))))
    assert np.array_equal(grads[w], value)
