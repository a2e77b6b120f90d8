"""
샘플링된 증강 변환 인스턴스
"""
from dataclasses import dataclass
from typing import Optional, Tuple

JITTER_SCALE_BOUNDS = (0.6, 1.4)
JITTER_SHIFT_BOUNDS = (-0.2, 0.2)
MIN_CROP_SIZE = 4


@dataclass(frozen=True)
class Transform:
    """
    증강 파라미터 묶음

    같은 인스턴스를 두 패치에 적용하면 크롭 위치, 지터 계수, 잡음 실현값까지
    모두 같다.
    """
    flip_h: bool
    flip_v: bool
    crop: Optional[Tuple[int, int, int]]  # (top, left, size)
    jitter_scale: Tuple[float, ...]
    jitter_shift: Tuple[float, ...]
    blur_passes: int
    noise_std: float
    noise_seed: int
    patch_size: Optional[Tuple[int, int]] = None  # 샘플링 기준 (H, W)

    def __post_init__(self):
        if len(self.jitter_scale) != len(self.jitter_shift):
            raise ValueError("jitter_scale과 jitter_shift의 채널 수가 다릅니다.")
        if any(not JITTER_SCALE_BOUNDS[0] <= s <= JITTER_SCALE_BOUNDS[1] for s in self.jitter_scale):
            raise ValueError(f"jitter scale은 {JITTER_SCALE_BOUNDS} 범위여야 합니다: {self.jitter_scale}")
        if any(not JITTER_SHIFT_BOUNDS[0] <= s <= JITTER_SHIFT_BOUNDS[1] for s in self.jitter_shift):
            raise ValueError(f"jitter shift는 {JITTER_SHIFT_BOUNDS} 범위여야 합니다: {self.jitter_shift}")
        if self.crop is not None:
            top, left, size = self.crop
            if top < 0 or left < 0 or size < MIN_CROP_SIZE:
                raise ValueError(f"잘못된 크롭 영역입니다: {self.crop}")
        if self.blur_passes < 0 or self.noise_std < 0:
            raise ValueError("blur_passes와 noise_std는 음수일 수 없습니다.")

    @property
    def blur(self) -> bool:
        return self.blur_passes > 0

    @property
    def channels(self) -> int:
        return len(self.jitter_scale)

    @property
    def is_identity(self) -> bool:
        return (
                not self.flip_h
                and not self.flip_v
                and self.crop is None
                and all(s == 1.0 for s in self.jitter_scale)
                and all(s == 0.0 for s in self.jitter_shift)
                and self.blur_passes == 0
                and self.noise_std == 0.0
        )

    @classmethod
    def identity(cls, channels: int) -> "Transform":
        return cls(
            flip_h=False,
            flip_v=False,
            crop=None,
            jitter_scale=(1.0,) * channels,
            jitter_shift=(0.0,) * channels,
            blur_passes=0,
            noise_std=0.0,
            noise_seed=0,
        )
