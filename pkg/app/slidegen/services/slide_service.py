"""
가상 슬라이드 생성 서비스

라벨 격자에 원형 병변을 그리고, 라벨별 텍스처 원형 + 슬라이드 전역 저주파
변동 + 픽셀 잡음으로 패치 이미지를 만든다.
"""
import logging
from typing import Dict, List, Optional

import numpy as np

from app.core.exceptions import ComputationException, GeometryException
from app.core.utils import hash_arrays, make_rng
from app.slidegen.models.slide import SPLIT_NAMES, SlideDataset, TissueClass, VirtualSlide
from app.slidegen.schema.schemas import GenConfig, SplitCounts

logger = logging.getLogger(__name__)


def _check_geometry(config: GenConfig) -> None:
    diameter = 2 * config.lesion_radius_max + 1
    if diameter > min(config.rows, config.cols):
        raise GeometryException(
            f"병변 지름({diameter})이 격자({config.rows}×{config.cols})보다 큽니다.",
            details={"lesion_radius_max": config.lesion_radius_max, "rows": config.rows, "cols": config.cols},
        )


def _paint_lesions(config: GenConfig, target_class: TissueClass, rng: np.random.Generator) -> np.ndarray:
    labels = np.zeros((config.rows, config.cols), dtype=np.uint8)
    if target_class == TissueClass.BENIGN:
        return labels

    count = int(rng.integers(config.lesion_count_min, config.lesion_count_max + 1))
    # 마지막 병변이 target 클래스 (다른 병변에 덮이지 않도록 가장 나중에 그림)
    classes = [int(rng.integers(TissueClass.DYSPLASIA, target_class + 1)) for _ in range(count - 1)]
    classes.append(int(target_class))

    grid_r, grid_c = np.mgrid[0:config.rows, 0:config.cols]
    for lesion_class in classes:
        radius = int(rng.integers(config.lesion_radius_min, config.lesion_radius_max + 1))
        center_r = int(rng.integers(radius, config.rows - radius))
        center_c = int(rng.integers(radius, config.cols - radius))
        inside = (grid_r - center_r) ** 2 + (grid_c - center_c) ** 2 <= radius * radius
        labels[inside] = lesion_class
    return labels


def _nuisance_field(config: GenConfig, rng: np.random.Generator) -> np.ndarray:
    """채널별 (rows, cols) 곱셈 변동장, 값 범위 [1-amp, 1+amp]"""
    grid_r, grid_c = np.mgrid[0:config.rows, 0:config.cols].astype(np.float64)
    u = grid_r / config.rows
    v = grid_c / config.cols
    field = np.empty((config.rows, config.cols, config.channels), dtype=np.float64)
    for channel in range(config.channels):
        waves = np.zeros_like(u)
        for _ in range(2):
            fu, fv = rng.uniform(0.25, 1.0, size=2)
            phase = rng.uniform(0.0, 2.0 * np.pi)
            waves += np.sin(2.0 * np.pi * (fu * u + fv * v) + phase)
        field[:, :, channel] = 1.0 + 0.5 * config.nuisance_amplitude * waves
    return field


def _render_patches(config: GenConfig, labels: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    nuisance = _nuisance_field(config, rng)

    base = np.array([p.base for p in config.prototypes], dtype=np.float64)[labels]
    frequency = np.array([p.frequency for p in config.prototypes], dtype=np.float64)[labels]
    theta = rng.uniform(0.0, np.pi, size=labels.shape)
    phi = rng.uniform(0.0, 2.0 * np.pi, size=labels.shape)

    y, x = np.mgrid[0:config.patch_height, 0:config.patch_width].astype(np.float64)
    projection = (
            x[None, None] * np.cos(theta)[:, :, None, None]
            + y[None, None] * np.sin(theta)[:, :, None, None]
    )
    wave = np.sin(2.0 * np.pi * frequency[:, :, None, None] * projection / config.patch_width
                  + phi[:, :, None, None])

    texture = base[:, :, None, None, :] + config.texture_amplitude * wave[..., None]
    patches = texture * nuisance[:, :, None, None, :]
    if config.noise_std > 0:
        patches = patches + rng.normal(0.0, config.noise_std, size=patches.shape)
    return np.clip(patches, 0.0, 1.0).astype(np.float32)


def derive_slide_label(labels) -> TissueClass:
    """
    슬라이드 라벨 = 격자에 있는 가장 중증인 클래스

    Raises:
        ComputationException: 빈 격자
    """
    labels = np.asarray(labels)
    if labels.size == 0:
        raise ComputationException("빈 라벨 격자에서는 슬라이드 라벨을 정할 수 없습니다.", custom_code="EMPTY_GRID")
    return TissueClass(int(labels.max()))


def generate_slide(config: GenConfig, slide_id: int, target_class: TissueClass) -> VirtualSlide:
    """
    가상 슬라이드 1장 생성

    (seed, slide_id, target_class)가 같으면 비트 단위로 같은 슬라이드를 만든다.

    Args:
        config: 생성 설정
        slide_id: 슬라이드 ID
        target_class: 슬라이드가 가져야 할 최고 중증 클래스

    Returns:
        VirtualSlide

    Raises:
        GeometryException: 병변 지름이 격자보다 클 때
    """
    _check_geometry(config)
    target_class = TissueClass(target_class)
    rng = make_rng(config.seed, slide_id, int(target_class))

    labels = _paint_lesions(config, target_class, rng)
    patches = _render_patches(config, labels, rng)
    return VirtualSlide(
        slide_id=int(slide_id),
        patches=patches,
        labels=labels,
        slide_label=derive_slide_label(labels),
    )


def dataset_hash(dataset: SlideDataset) -> str:
    """분할, 슬라이드 ID, 패치, 라벨을 모두 반영한 데이터셋 해시"""
    arrays: Dict[str, np.ndarray] = {}
    for split_name, slides in dataset.splits().items():
        for slide in slides:
            key = f"{split_name}/{slide.slide_id:06d}"
            arrays[f"{key}/patches"] = slide.patches
            arrays[f"{key}/labels"] = slide.labels
            arrays[f"{key}/slide_label"] = np.array([int(slide.slide_label)], dtype=np.uint8)
    return hash_arrays(arrays)


def generate_dataset(config: GenConfig, counts: Optional[SplitCounts] = None) -> SlideDataset:
    """
    분할별 클래스 수대로 슬라이드 생성

    slide_id는 train → val → test, 클래스 순으로 0부터 순차 부여한다.

    Args:
        config: 생성 설정
        counts: 분할별 클래스 수

    Returns:
        SlideDataset
    """
    counts = counts or SplitCounts()
    _check_geometry(config)

    logger.info("=" * 80)
    logger.info(f"가상 슬라이드 데이터셋 생성 시작 (seed={config.seed}, grid={config.rows}×{config.cols})")
    logger.info("=" * 80)

    splits: Dict[str, List[VirtualSlide]] = {}
    next_id = 0
    for split_name in SPLIT_NAMES:
        slides = []
        for tissue_class, count in zip(TissueClass, getattr(counts, split_name).as_list()):
            for _ in range(count):
                slides.append(generate_slide(config, next_id, tissue_class))
                next_id += 1
        splits[split_name] = slides
        logger.info(f"✓ {split_name}: {len(slides)}장 생성")

    dataset = SlideDataset(dataset_id="", gen_config=config.dict(), **splits)
    dataset.dataset_id = f"syn-{config.seed}-{dataset_hash(dataset)[:12]}"
    logger.info(f"데이터셋 생성 완료: {dataset.dataset_id}")
    return dataset


def prototype_separation(config: GenConfig) -> float:
    """Benign과 Malignant 원형의 평균 밝기 차이"""
    benign = float(np.mean(config.prototypes[TissueClass.BENIGN].base))
    malignant = float(np.mean(config.prototypes[TissueClass.MALIGNANT].base))
    return abs(benign - malignant)


def class_fractions(slide: VirtualSlide) -> Dict[str, float]:
    """슬라이드 안 클래스별 패치 비율"""
    counts = np.bincount(slide.labels.reshape(-1), minlength=len(TissueClass))
    return {tissue.name.lower(): float(counts[tissue]) / slide.patch_count for tissue in TissueClass}
