"""
증강 설정 스키마
"""
from typing import Tuple

from pydantic import BaseModel, Field, validator

from app.augment.models.transform import JITTER_SCALE_BOUNDS, JITTER_SHIFT_BOUNDS


class AugmentConfig(BaseModel):
    """증강 변환 분포 T"""
    flip_h_prob: float = Field(0.5, ge=0.0, le=1.0, description="좌우 뒤집기 확률")
    flip_v_prob: float = Field(0.5, ge=0.0, le=1.0, description="상하 뒤집기 확률")
    crop_prob: float = Field(1.0, ge=0.0, le=1.0, description="random resized crop 확률")
    crop_scale: Tuple[float, float] = Field((0.5, 1.0), description="크롭 면적 비율 범위")
    jitter_prob: float = Field(0.8, ge=0.0, le=1.0, description="색상 지터 확률")
    jitter_scale: Tuple[float, float] = Field((0.8, 1.2), description="채널 배율 범위")
    jitter_shift: Tuple[float, float] = Field((-0.1, 0.1), description="채널 이동 범위")
    blur_prob: float = Field(0.5, ge=0.0, le=1.0, description="블러 확률")
    blur_passes: int = Field(3, ge=1, description="3×3 박스 블러 반복 횟수 (가우시안 근사)")
    noise_std: float = Field(0.02, ge=0.0, description="픽셀 잡음 표준편차")

    @validator("crop_scale", "jitter_scale", "jitter_shift")
    def validate_range(cls, v):
        low, high = v
        if low > high:
            raise ValueError(f"범위가 비어 있습니다: {v}")
        return v

    @validator("crop_scale")
    def validate_crop_scale(cls, v):
        if not 0.0 < v[0] <= v[1] <= 1.0:
            raise ValueError(f"crop_scale은 (0, 1] 범위여야 합니다: {v}")
        return v

    @validator("jitter_scale")
    def validate_jitter_scale(cls, v):
        if v[0] < JITTER_SCALE_BOUNDS[0] or v[1] > JITTER_SCALE_BOUNDS[1]:
            raise ValueError(f"jitter_scale은 {JITTER_SCALE_BOUNDS} 안에 있어야 합니다: {v}")
        return v

    @validator("jitter_shift")
    def validate_jitter_shift(cls, v):
        if v[0] < JITTER_SHIFT_BOUNDS[0] or v[1] > JITTER_SHIFT_BOUNDS[1]:
            raise ValueError(f"jitter_shift는 {JITTER_SHIFT_BOUNDS} 안에 있어야 합니다: {v}")
        return v

    @classmethod
    def identity(cls) -> "AugmentConfig":
        """모든 변환이 꺼진 설정"""
        return cls(
            flip_h_prob=0.0,
            flip_v_prob=0.0,
            crop_prob=0.0,
            jitter_prob=0.0,
            jitter_scale=(1.0, 1.0),
            jitter_shift=(0.0, 0.0),
            blur_prob=0.0,
            noise_std=0.0,
        )
