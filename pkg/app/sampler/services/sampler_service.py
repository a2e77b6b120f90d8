"""
피벗/이웃 샘플링 서비스

체비셰프 거리 제한 안에서 피벗의 이웃을 고르고, 같은 t1 인스턴스를 피벗과
이웃에 적용해 contextual 쌍을 만든다. 라벨 불일치율 분석도 여기서 한다.
"""
import logging
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from app.augment.schema.schemas import AugmentConfig
from app.augment.services.augment_service import apply, sample_transform
from app.core.constants import Numerics
from app.core.exceptions import (
    BatchException,
    ConfigException,
    DomainException,
    NoNeighborException,
    UndefinedRateException,
)
from app.core.utils import format_distance
from app.sampler.models.sampling import PairBatch, PatchCoord, SamplingMode
from app.sampler.schema.schemas import SamplerConfig
from app.slidegen.models.slide import VirtualSlide

logger = logging.getLogger(__name__)


def chebyshev(a: PatchCoord, b: PatchCoord) -> int:
    """
    max(|Δrow|, |Δcol|)

    Raises:
        DomainException: 서로 다른 슬라이드의 좌표
    """
    if a.slide_id != b.slide_id:
        raise DomainException(
            f"서로 다른 슬라이드의 좌표는 비교할 수 없습니다 ({a.slide_id} vs {b.slide_id})",
            details={"left": a.slide_id, "right": b.slide_id},
        )
    return max(abs(a.row - b.row), abs(a.col - b.col))


def neighbors_within(slide: VirtualSlide, pivot: PatchCoord, d: Optional[int]) -> List[PatchCoord]:
    """
    피벗을 제외한, 거리 d 이내의 격자 안 좌표 (행 우선 순서)

    Args:
        slide: 슬라이드
        pivot: 피벗 좌표
        d: 거리 제한 (None이면 슬라이드 전체)

    Returns:
        PatchCoord 목록
    """
    if not (0 <= pivot.row < slide.rows and 0 <= pivot.col < slide.cols):
        raise DomainException(f"피벗 {pivot}이 격자({slide.rows}×{slide.cols}) 밖에 있습니다.")
    if d is None:
        row_range = range(slide.rows)
        col_range = range(slide.cols)
    else:
        row_range = range(max(0, pivot.row - d), min(slide.rows, pivot.row + d + 1))
        col_range = range(max(0, pivot.col - d), min(slide.cols, pivot.col + d + 1))
    return [
        PatchCoord(slide.slide_id, row, col)
        for row in row_range
        for col in col_range
        if (row, col) != (pivot.row, pivot.col)
    ]


def _candidates(
        slide: VirtualSlide,
        pivot: PatchCoord,
        d: Optional[int],
        candidate_cap: Optional[int],
) -> List[PatchCoord]:
    candidates = neighbors_within(slide, pivot, d)
    if candidate_cap is not None and len(candidates) > candidate_cap:
        candidates = sorted(candidates, key=lambda c: (chebyshev(pivot, c), c.row, c.col))[:candidate_cap]
    return candidates


def sample_contextual_pair(
        slide: VirtualSlide,
        pivot: PatchCoord,
        d: Optional[int],
        rng: np.random.Generator,
        candidate_cap: Optional[int] = None,
) -> PatchCoord:
    """
    후보 이웃 중 하나를 균등하게 선택

    Raises:
        NoNeighborException: 후보가 없을 때 (예: 1×1 슬라이드)
    """
    candidates = _candidates(slide, pivot, d, candidate_cap)
    if not candidates:
        raise NoNeighborException(
            f"피벗 {pivot} 주변 거리 {format_distance(d)} 안에 이웃이 없습니다.",
            details={"slide_id": pivot.slide_id, "row": pivot.row, "col": pivot.col},
        )
    return candidates[int(rng.integers(len(candidates)))]


def _draw_pivot(slides: Sequence[VirtualSlide], offsets: np.ndarray, rng: np.random.Generator) -> Tuple[int, PatchCoord]:
    flat = int(rng.integers(offsets[-1]))
    slide_index = int(np.searchsorted(offsets, flat, side="right"))
    slide = slides[slide_index]
    local = flat - (int(offsets[slide_index - 1]) if slide_index > 0 else 0)
    row, col = divmod(local, slide.cols)
    return slide_index, PatchCoord(slide.slide_id, row, col)


def build_batch(
        slides: Sequence[VirtualSlide],
        config: SamplerConfig,
        augment_config: AugmentConfig,
        rng: np.random.Generator,
        neighbor_rng: Optional[np.random.Generator] = None,
) -> PairBatch:
    """
    피벗 M개에 대해 세 가지 뷰 생성

    피벗과 변환은 rng에서, 이웃 선택은 neighbor_rng에서 뽑는다. 그래서 같은 rng
    상태라면 context 모드의 view_a, view_b는 standard 모드와 비트 단위로 같다.

    Args:
        slides: 학습 슬라이드
        config: 샘플링 설정
        augment_config: 증강 설정
        rng: 피벗/변환 난수 생성기
        neighbor_rng: 이웃 선택 난수 생성기 (없으면 rng 사용)

    Returns:
        PairBatch

    Raises:
        BatchException: 슬라이드가 없거나 피벗 재시도가 모두 실패했을 때
    """
    if not slides:
        raise BatchException("학습 슬라이드가 없습니다.")
    neighbor_rng = neighbor_rng if neighbor_rng is not None else rng
    by_id: Dict[int, VirtualSlide] = {slide.slide_id: slide for slide in slides}
    offsets = np.cumsum([slide.patch_count for slide in slides])
    patch_shape = slides[0].patch_shape
    context = config.mode == SamplingMode.CONTEXT

    pivots: List[PatchCoord] = []
    neighbors: List[PatchCoord] = []
    for _ in range(config.pivot_count):
        _, pivot = _draw_pivot(slides, offsets, rng)
        if context:
            for attempt in range(Numerics.MAX_PIVOT_RETRIES + 1):
                try:
                    neighbor = sample_contextual_pair(
                        by_id[pivot.slide_id], pivot, config.distance_cap, neighbor_rng, config.candidate_cap
                    )
                    break
                except NoNeighborException:
                    if attempt == Numerics.MAX_PIVOT_RETRIES:
                        raise BatchException(
                            f"피벗 재시도 {Numerics.MAX_PIVOT_RETRIES}회 후에도 이웃이 있는 피벗을 찾지 못했습니다.",
                            details={"distance_cap": format_distance(config.distance_cap)},
                        )
                    logger.warning(f"이웃 없는 피벗 {pivot}, 다시 샘플링합니다 ({attempt + 1}/{Numerics.MAX_PIVOT_RETRIES})")
                    _, pivot = _draw_pivot(slides, offsets, rng)
            neighbors.append(neighbor)
        pivots.append(pivot)

    transforms = [
        (sample_transform(augment_config, rng, patch_shape), sample_transform(augment_config, rng, patch_shape))
        for _ in pivots
    ]

    def _view(coords: List[PatchCoord], which: int) -> np.ndarray:
        return np.stack([
            apply(pair[which], by_id[coord.slide_id].patch(coord.row, coord.col))
            for coord, pair in zip(coords, transforms)
        ]).astype(np.float64)

    return PairBatch(
        view_a=_view(pivots, 0),
        view_b=_view(pivots, 1),
        view_ctx=_view(neighbors, 0) if context else None,
        pivots=pivots,
        neighbors=neighbors if context else None,
        transforms=transforms,
    )


def _offsets_at(d: int, within: bool) -> List[Tuple[int, int]]:
    low = 1 if within else d
    return [
        (dr, dc)
        for dr in range(-d, d + 1)
        for dc in range(-d, d + 1)
        if low <= max(abs(dr), abs(dc)) <= d
    ]


def _pair_counts(labels: np.ndarray, d: int, within: bool) -> Tuple[int, int]:
    rows, cols = labels.shape
    pairs = 0
    mismatches = 0
    for dr, dc in _offsets_at(d, within):
        if abs(dr) >= rows or abs(dc) >= cols:
            continue
        source = labels[max(0, -dr):rows - max(0, dr), max(0, -dc):cols - max(0, dc)]
        target = labels[max(0, dr):rows - max(0, -dr), max(0, dc):cols - max(0, -dc)]
        pairs += source.size
        mismatches += int(np.count_nonzero(source != target))
    return pairs, mismatches


def mismatch_rate(slides: Sequence[VirtualSlide], d: int, within: bool = False) -> float:
    """
    같은 슬라이드 안 (피벗, 이웃) 순서쌍 중 라벨이 다른 비율

    Args:
        slides: 대상 슬라이드 (호출 측에서 non-benign만 전달)
        d: 체비셰프 거리
        within: False면 거리가 정확히 d인 쌍, True면 1 ≤ 거리 ≤ d인 쌍

    Returns:
        [0, 1] 비율

    Raises:
        ConfigException: d < 1
        UndefinedRateException: 해당 거리의 쌍이 하나도 없을 때
    """
    if isinstance(d, bool) or not isinstance(d, (int, np.integer)) or d < 1:
        raise ConfigException(f"불일치율 거리는 1 이상의 정수여야 합니다: {d}")
    total_pairs = 0
    total_mismatches = 0
    for slide in slides:
        pairs, mismatches = _pair_counts(slide.labels, int(d), within)
        total_pairs += pairs
        total_mismatches += mismatches
    if total_pairs == 0:
        raise UndefinedRateException(f"거리 {d}인 패치 쌍이 없습니다.", details={"d": int(d), "within": within})
    return total_mismatches / total_pairs


def mismatch_curve(slides: Sequence[VirtualSlide], distances: Sequence[int]) -> List[Dict[str, float]]:
    """거리별 (정확히 d, d 이내) 불일치율"""
    return [
        {"d": int(d), "mismatch": mismatch_rate(slides, d), "mismatch_within": mismatch_rate(slides, d, within=True)}
        for d in distances
    ]
