"""
증강 변환 샘플링 및 적용
"""
import logging
from typing import Sequence, Tuple

import numpy as np

from app.augment.models.transform import MIN_CROP_SIZE, Transform
from app.augment.schema.schemas import AugmentConfig
from app.core.exceptions import DimensionException
from app.core.utils import make_rng

logger = logging.getLogger(__name__)

_NOISE_SEED_HIGH = 2 ** 31 - 1


def sample_transform(config: AugmentConfig, rng: np.random.Generator, patch_shape: Sequence[int]) -> Transform:
    """
    증강 변환 인스턴스 샘플링

    적용 여부와 관계없이 항상 같은 순서, 같은 개수의 난수를 뽑는다.

    Args:
        config: 증강 설정
        rng: 난수 생성기
        patch_shape: (H, W, C)

    Returns:
        Transform
    """
    height, width, channels = (int(s) for s in patch_shape)
    side = min(height, width)

    flip_h = rng.random() < config.flip_h_prob
    flip_v = rng.random() < config.flip_v_prob

    use_crop = rng.random() < config.crop_prob
    area = rng.uniform(*config.crop_scale)
    size = int(np.clip(round(np.sqrt(area) * side), MIN_CROP_SIZE, side))
    top_u, left_u = rng.random(2)
    crop = None
    if use_crop:
        top = int(top_u * (height - size + 1))
        left = int(left_u * (width - size + 1))
        crop = (top, left, size)

    use_jitter = rng.random() < config.jitter_prob
    scales = rng.uniform(*config.jitter_scale, size=channels)
    shifts = rng.uniform(*config.jitter_shift, size=channels)
    if not use_jitter:
        scales = np.ones(channels)
        shifts = np.zeros(channels)

    use_blur = rng.random() < config.blur_prob
    noise_seed = int(rng.integers(0, _NOISE_SEED_HIGH))

    return Transform(
        flip_h=bool(flip_h),
        flip_v=bool(flip_v),
        crop=crop,
        jitter_scale=tuple(float(s) for s in scales),
        jitter_shift=tuple(float(s) for s in shifts),
        blur_passes=config.blur_passes if use_blur else 0,
        noise_std=float(config.noise_std),
        noise_seed=noise_seed if config.noise_std > 0 else 0,
        patch_size=(height, width),
    )


def _box_blur(image: np.ndarray, passes: int) -> np.ndarray:
    height, width = image.shape[:2]
    for _ in range(passes):
        padded = np.pad(image, ((1, 1), (1, 1), (0, 0)), mode="edge")
        total = np.zeros_like(image)
        for dr in range(3):
            for dc in range(3):
                total += padded[dr:dr + height, dc:dc + width]
        image = total / 9.0
    return image


def _crop_resize(image: np.ndarray, crop: Tuple[int, int, int]) -> np.ndarray:
    height, width = image.shape[:2]
    top, left, size = crop
    if top + size > height or left + size > width:
        raise DimensionException(f"크롭 영역 {crop}이 패치({height}×{width}) 밖으로 나갑니다.")
    # 최근접 이웃 리사이즈
    rows = np.minimum(((np.arange(height) + 0.5) * size / height).astype(np.int64), size - 1)
    cols = np.minimum(((np.arange(width) + 0.5) * size / width).astype(np.int64), size - 1)
    region = image[top:top + size, left:left + size]
    return region[rows][:, cols]


def apply(transform: Transform, patch: np.ndarray) -> np.ndarray:
    """
    변환을 패치 하나에 적용

    순서: crop+resize → flip → jitter(clip) → blur → noise → clip.
    입력과 같은 dtype의 새 배열을 돌려준다.

    Raises:
        DimensionException: 패치가 H×W×C가 아니거나 채널 수, 또는 샘플링 기준 H×W와 다를 때
    """
    patch = np.asarray(patch)
    if patch.ndim != 3 or patch.shape[2] != transform.channels:
        raise DimensionException(
            f"패치 shape {patch.shape}가 변환 채널 수({transform.channels})와 맞지 않습니다."
        )
    if transform.patch_size is not None and tuple(patch.shape[:2]) != tuple(transform.patch_size):
        raise DimensionException(
            f"패치 크기 {patch.shape[:2]}가 변환 샘플링 기준 {transform.patch_size}와 다릅니다.",
            details={"patch": list(patch.shape), "expected": list(transform.patch_size)},
        )
    if transform.is_identity:
        return patch.copy()

    image = patch.astype(np.float64)
    if transform.crop is not None:
        image = _crop_resize(image, transform.crop)
    if transform.flip_h:
        image = image[:, ::-1]
    if transform.flip_v:
        image = image[::-1]

    scale = np.asarray(transform.jitter_scale, dtype=np.float64)
    shift = np.asarray(transform.jitter_shift, dtype=np.float64)
    image = np.clip(image * scale + shift, 0.0, 1.0)

    if transform.blur:
        image = _box_blur(image, transform.blur_passes)
    if transform.noise_std > 0:
        image = image + make_rng(transform.noise_seed).normal(0.0, transform.noise_std, size=image.shape)

    return np.clip(image, 0.0, 1.0).astype(patch.dtype)


def apply_batch(transform: Transform, patches: Sequence[np.ndarray]) -> np.ndarray:
    """같은 변환을 여러 패치에 적용해 (N, H, W, C)로 쌓는다"""
    shapes = {np.shape(patch) for patch in patches}
    if len(shapes) > 1:
        raise DimensionException(f"배치 안의 패치 shape가 서로 다릅니다: {sorted(shapes)}")
    return np.stack([apply(transform, patch) for patch in patches])
