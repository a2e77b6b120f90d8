import numpy as np
import pytest
from pydantic import ValidationError

from app.augment.models.transform import Transform
from app.augment.schema.schemas import AugmentConfig
from app.augment.services.augment_service import apply, apply_batch, sample_transform
from app.core.exceptions import DimensionException


@pytest.fixture
def patch(rng):
    return rng.uniform(0.0, 1.0, size=(8, 8, 3)).astype(np.float32)


def _transform(**changes):
    base = Transform.identity(3)
    values = {field: getattr(base, field) for field in base.__dataclass_fields__}
    values.update(changes)
    return Transform(**values)


def test_identity_returns_copy(patch):
    out = apply(Transform.identity(3), patch)
    assert np.array_equal(out, patch)
    assert out is not patch


def test_flip_h(patch):
    assert np.array_equal(apply(_transform(flip_h=True), patch), patch[:, ::-1])


def test_flip_v(patch):
    assert np.array_equal(apply(_transform(flip_v=True), patch), patch[::-1])


def test_same_instance_gives_same_result(patch):
    transform = sample_transform(AugmentConfig(), np.random.default_rng(3), patch.shape)
    assert np.array_equal(apply(transform, patch), apply(transform, patch))


def test_sampling_is_deterministic(patch):
    a = sample_transform(AugmentConfig(), np.random.default_rng(9), patch.shape)
    b = sample_transform(AugmentConfig(), np.random.default_rng(9), patch.shape)
    assert a == b


def test_sampling_draws_fixed_number_of_values(patch):
    # 적용 여부와 무관하게 같은 수의 난수를 소비한다
    rng_on = np.random.default_rng(4)
    rng_off = np.random.default_rng(4)
    sample_transform(AugmentConfig(), rng_on, patch.shape)
    sample_transform(AugmentConfig.identity(), rng_off, patch.shape)
    assert rng_on.random() == rng_off.random()


def test_identity_config_samples_identity(patch, rng):
    transform = sample_transform(AugmentConfig.identity(), rng, patch.shape)
    assert transform.is_identity


def test_output_range_and_dtype(patch, rng):
    config = AugmentConfig(jitter_prob=1.0, jitter_shift=(0.1, 0.2), noise_std=0.5)
    for _ in range(5):
        out = apply(sample_transform(config, rng, patch.shape), patch)
        assert out.dtype == patch.dtype
        assert out.shape == patch.shape
        assert out.min() >= 0.0 and out.max() <= 1.0


def test_crop_outside_patch(patch):
    with pytest.raises(DimensionException):
        apply(_transform(crop=(6, 6, 4)), patch)


def test_channel_mismatch(patch):
    with pytest.raises(DimensionException):
        apply(Transform.identity(4), patch)


def test_sampled_transform_rejects_other_patch_size(patch, rng):
    transform = sample_transform(AugmentConfig(crop_prob=1.0), rng, patch.shape)
    assert transform.patch_size == (8, 8)
    with pytest.raises(DimensionException) as exc_info:
        apply(transform, patch[:7, :7])
    assert exc_info.value.details["expected"] == [8, 8]


def test_apply_batch_rejects_mixed_shapes(patch):
    with pytest.raises(DimensionException):
        apply_batch(Transform.identity(3), [patch, patch[:4, :4]])


def test_transform_bounds():
    with pytest.raises(ValueError):
        _transform(jitter_scale=(2.0, 1.0, 1.0))
    with pytest.raises(ValueError):
        _transform(crop=(0, 0, 2))


def test_augment_config_validation():
    with pytest.raises(ValidationError):
        AugmentConfig(crop_scale=(0.9, 0.5))
    with pytest.raises(ValidationError):
        AugmentConfig(jitter_shift=(-0.5, 0.1))


def test_apply_batch_stacks(patch):
    out = apply_batch(_transform(flip_h=True), [patch, patch])
    assert out.shape == (2, 8, 8, 3)
    assert np.array_equal(out[0], out[1])
