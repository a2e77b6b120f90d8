"""
피벗/이웃 샘플링 설정 스키마
"""
from typing import Optional

from pydantic import BaseModel, Field, validator

from app.core.constants import ExperimentDefaults
from app.sampler.models.sampling import SamplingMode


class SamplerConfig(BaseModel):
    """피벗 M개, 체비셰프 거리 제한 d, 후보 수 K, 샘플링 모드"""
    pivot_count: int = Field(128, ge=1, description="배치당 피벗 수 M")
    distance_cap: Optional[int] = Field(1, ge=1, description="체비셰프 거리 제한 d (None이면 제한 없음)")
    candidate_cap: Optional[int] = Field(None, ge=1, description="가까운 순 후보 수 K (None이면 범위 안 전체)")
    mode: SamplingMode = Field(SamplingMode.CONTEXT, description="standard 또는 context")

    @validator("distance_cap", pre=True)
    def parse_unbounded(cls, v):
        if isinstance(v, str) and v.strip().lower() == ExperimentDefaults.UNBOUNDED_DISTANCE:
            return None
        return v
