import numpy as np
import pytest

from app.core.exceptions import ConfigException, DegenerateBatchException, DimensionException
from app.ndgrad.services import ops
from app.ndgrad.services.gradient_check import grad_check
from app.ssl.models.embedding import ViewOutputs
from app.ssl.schema.schemas import CombinedLossConfig, SSLMethod
from app.ssl.services.loss_service import (
    barlow_twins_loss,
    byol_pair_loss,
    byol_symmetric_loss,
    combined_loss,
    cross_correlation,
    pair_loss,
    vicreg_loss,
)


def _whitened(rng, n=32, dim=6):
    """열 평균 0, 모분산 1, 열끼리 상관 0인 배치"""
    raw = rng.normal(size=(n, dim))
    centered = raw - raw.mean(axis=0)
    q, _ = np.linalg.qr(centered)
    return q * np.sqrt(n)


def test_cross_correlation_of_whitened_batch_is_identity(rng):
    z = _whitened(rng)
    c = cross_correlation(ops.constant(z), ops.constant(z)).value
    assert np.allclose(c, np.eye(z.shape[1]), atol=1e-10)


def test_barlow_twins_identical_whitened_is_zero(rng):
    z = ops.constant(_whitened(rng))
    assert barlow_twins_loss(z, z).item() < 1e-9


def test_barlow_twins_negated_is_four_d(rng):
    z = _whitened(rng, dim=5)
    loss = barlow_twins_loss(ops.constant(z), ops.constant(-z)).item()
    assert abs(loss - 4.0 * 5) < 1e-9


def test_vicreg_identical_whitened_is_zero(rng):
    z = ops.constant(_whitened(rng))
    assert vicreg_loss(z, z).item() < 1e-6


def test_vicreg_collapsed_batch_pays_variance_penalty():
    z = ops.constant(np.zeros((8, 4)))
    config = CombinedLossConfig()
    loss = vicreg_loss(z, z, config).item()
    expected = config.vicreg_variance * 2.0 * (config.vicreg_gamma - np.sqrt(config.vicreg_epsilon))
    assert abs(loss - expected) < 1e-9


@pytest.mark.parametrize("loss_fn", [barlow_twins_loss, vicreg_loss])
def test_losses_reject_single_row(loss_fn):
    z = ops.constant(np.ones((1, 4)))
    with pytest.raises(DegenerateBatchException):
        loss_fn(z, z)


def test_losses_reject_shape_mismatch(rng):
    with pytest.raises(DimensionException):
        barlow_twins_loss(ops.constant(rng.normal(size=(4, 3))), ops.constant(rng.normal(size=(4, 2))))


def test_byol_identical_negated_orthogonal(rng):
    q = rng.normal(size=(6, 4))
    assert abs(byol_pair_loss(ops.constant(q), ops.constant(q)).item()) < 1e-12
    assert abs(byol_pair_loss(ops.constant(q), ops.constant(-q)).item() - 4.0) < 1e-12

    a = np.tile([[1.0, 0.0, 0.0, 0.0]], (6, 1))
    b = np.tile([[0.0, 2.0, 0.0, 0.0]], (6, 1))
    assert abs(byol_pair_loss(ops.constant(a), ops.constant(b)).item() - 2.0) < 1e-12


def test_byol_target_receives_no_gradient(rng):
    prediction = ops.leaf(rng.normal(size=(4, 3)))
    target = ops.leaf(rng.normal(size=(4, 3)))
    grads = ops.backward(byol_pair_loss(prediction, target))
    assert prediction in grads
    assert target not in grads


def test_byol_symmetric_requires_predictions(rng):
    z = ops.constant(rng.normal(size=(4, 3)))
    with pytest.raises(ValueError):
        byol_symmetric_loss(ViewOutputs(projection=z), ViewOutputs(projection=z))


def test_pair_loss_dispatch(rng):
    za = ops.constant(rng.normal(size=(8, 4)))
    zb = ops.constant(rng.normal(size=(8, 4)))
    bt = CombinedLossConfig(method=SSLMethod.BARLOW_TWINS)
    vic = CombinedLossConfig(method=SSLMethod.VICREG)
    left, right = ViewOutputs(projection=za), ViewOutputs(projection=zb)
    assert pair_loss(left, right, bt).item() == barlow_twins_loss(za, zb, bt.bt_lambda).item()
    assert pair_loss(left, right, vic).item() == vicreg_loss(za, zb, vic).item()


def _explode():
    raise AssertionError("평가되면 안 되는 항입니다.")


def test_combined_loss_alpha_zero_skips_context():
    assert combined_loss(_explode, lambda: ops.constant(3.0), 0.0).item() == 3.0


def test_combined_loss_alpha_one_skips_standard():
    assert combined_loss(lambda: ops.constant(2.0), _explode, 1.0).item() == 2.0


def test_combined_loss_mixes_terms():
    assert abs(combined_loss(2.0, 6.0, 0.25).item() - (0.25 * 2.0 + 0.75 * 6.0)) < 1e-15


@pytest.mark.parametrize("alpha", [-0.1, 1.5])
def test_combined_loss_rejects_alpha(alpha):
    with pytest.raises(ConfigException):
        combined_loss(1.0, 1.0, alpha)


@pytest.mark.parametrize("seed", range(50))
def test_barlow_twins_gradient(seed):
    rng = np.random.default_rng(seed)
    zb = ops.constant(rng.normal(size=(8, 4)))
    assert grad_check(lambda za: barlow_twins_loss(za, zb), rng.normal(size=(8, 4))) < 1e-4


@pytest.mark.parametrize("seed", range(50))
def test_vicreg_gradient(seed):
    rng = np.random.default_rng(seed)
    # 표준편차가 γ=1에서 멀도록 축소해 hinge 경계를 피한다
    zb = ops.constant(0.4 * rng.normal(size=(8, 4)))
    assert grad_check(lambda za: vicreg_loss(za, zb), 0.4 * rng.normal(size=(8, 4))) < 1e-4


@pytest.mark.parametrize("seed", range(50))
def test_byol_gradient(seed):
    rng = np.random.default_rng(seed)
    target = ops.constant(rng.normal(size=(6, 4)))
    assert grad_check(lambda q: byol_pair_loss(q, target), rng.normal(size=(6, 4))) < 1e-4


# ===== 이중 루프 재계산 =====

def _loop_standardize(z):
    n, dim = z.shape
    out = np.zeros_like(z)
    for j in range(dim):
        mean = sum(z[i, j] for i in range(n)) / n
        std = np.sqrt(sum((z[i, j] - mean) ** 2 for i in range(n)) / n)
        for i in range(n):
            out[i, j] = (z[i, j] - mean) / std
    return out


def _loop_barlow_twins(za, zb, bt_lambda):
    n, dim = za.shape
    sa, sb = _loop_standardize(za), _loop_standardize(zb)
    c = np.zeros((dim, dim))
    total = 0.0
    for i in range(dim):
        for j in range(dim):
            c[i, j] = sum(sa[k, i] * sb[k, j] for k in range(n)) / n
            total += (1.0 - c[i, j]) ** 2 if i == j else bt_lambda * c[i, j] ** 2
    return c, total


def _loop_covariance(z):
    n, dim = z.shape
    means = [sum(z[k, j] for k in range(n)) / n for j in range(dim)]
    cov = np.zeros((dim, dim))
    for i in range(dim):
        for j in range(dim):
            cov[i, j] = sum((z[k, i] - means[i]) * (z[k, j] - means[j]) for k in range(n)) / (n - 1)
    return cov


def _loop_vicreg(za, zb, config):
    n, dim = za.shape
    invariance = sum((za[i, j] - zb[i, j]) ** 2 for i in range(n) for j in range(dim)) / (n * dim)
    variance = 0.0
    covariance = 0.0
    for z in (za, zb):
        cov = _loop_covariance(z)
        for j in range(dim):
            std = np.sqrt(cov[j, j] + config.vicreg_epsilon)
            variance += max(0.0, config.vicreg_gamma - std) / dim
            for i in range(dim):
                if i != j:
                    covariance += cov[i, j] ** 2 / dim
    return (config.vicreg_invariance * invariance + config.vicreg_variance * variance
            + config.vicreg_covariance * covariance)


@pytest.mark.parametrize("seed", range(5))
def test_barlow_twins_matches_loop_recomputation(seed):
    rng = np.random.default_rng(seed)
    za, zb = rng.normal(size=(8, 4)), rng.normal(size=(8, 4))
    c, expected = _loop_barlow_twins(za, zb, 0.005)
    assert np.max(np.abs(cross_correlation(ops.constant(za), ops.constant(zb)).value - c)) < 1e-10
    assert abs(barlow_twins_loss(ops.constant(za), ops.constant(zb), 0.005).item() - expected) < 1e-10


@pytest.mark.parametrize("seed", range(5))
def test_vicreg_matches_loop_recomputation(seed):
    rng = np.random.default_rng(seed)
    za, zb = rng.normal(size=(8, 4)), rng.normal(size=(8, 4))
    config = CombinedLossConfig()
    assert abs(vicreg_loss(ops.constant(za), ops.constant(zb), config).item() - _loop_vicreg(za, zb, config)) < 1e-10


@pytest.mark.parametrize("loss_fn", [barlow_twins_loss, vicreg_loss])
@pytest.mark.parametrize("seed", range(5))
def test_losses_ignore_row_order(loss_fn, seed):
    rng = np.random.default_rng(seed)
    za, zb = rng.normal(size=(8, 4)), rng.normal(size=(8, 4))
    order = rng.permutation(8)
    original = loss_fn(ops.constant(za), ops.constant(zb)).item()
    permuted = loss_fn(ops.constant(za[order]), ops.constant(zb[order])).item()
    assert abs(original - permuted) < 1e-10


@pytest.mark.parametrize("alpha", [0.0, 0.1, 0.25, 0.5, 0.9, 1.0])
def test_combined_loss_of_equal_terms_is_unchanged(rng, alpha):
    z = ops.constant(rng.normal(size=(8, 4)))
    loss = barlow_twins_loss(z, ops.constant(rng.normal(size=(8, 4))))
    assert abs(combined_loss(loss, loss, alpha).item() - loss.item()) < 1e-12
