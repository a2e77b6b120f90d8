"""
실험 설정 및 결과 스키마
"""
from typing import List, Optional, Union

from pydantic import BaseModel, Field, root_validator, validator

from app.core.constants import ExperimentDefaults
from app.core.utils import format_distance
from app.eval.schema.schemas import EvalConfig
from app.sampler.models.sampling import SamplingMode
from app.slidegen.schema.schemas import GenConfig, SplitCounts
from app.ssl.schema.schemas import SSLMethod
from app.train.schema.schemas import TrainConfig
from config import settings

# standard 샘플링 결과 행의 d 값 (이웃을 쓰지 않음)
NO_DISTANCE = "-"


def _default_seeds() -> List[int]:
    return settings.default_seeds


class ExperimentConfig(BaseModel):
    """실험 한 건 (시드 여러 개) 설정"""
    dataset_path: Optional[str] = Field(None, description="저장된 데이터셋 경로 (없으면 gen으로 생성)")
    gen: GenConfig = Field(default_factory=GenConfig)
    counts: SplitCounts = Field(default_factory=SplitCounts)
    method: SSLMethod = Field(SSLMethod.BARLOW_TWINS, description="bt, byol, vicreg")
    sampling: SamplingMode = Field(SamplingMode.CONTEXT, description="standard 또는 context")
    alpha: Optional[float] = Field(None, ge=0.0, le=1.0, description="α (미지정 시 standard 0, context 0.5)")
    distance: Union[int, str] = Field(1, description="체비셰프 거리 제한 (양의 정수 또는 'inf')")
    seeds: List[int] = Field(default_factory=_default_seeds, min_items=1, description="시드 목록")
    train: TrainConfig = Field(default_factory=TrainConfig)
    eval: EvalConfig = Field(default_factory=EvalConfig)

    @validator("distance", pre=True)
    def validate_distance(cls, v):
        if isinstance(v, str):
            text = v.strip().lower()
            if text == ExperimentDefaults.UNBOUNDED_DISTANCE:
                return ExperimentDefaults.UNBOUNDED_DISTANCE
            try:
                v = int(text)
            except ValueError:
                raise ValueError(f"distance는 양의 정수 또는 'inf'여야 합니다: {v}")
        if isinstance(v, bool) or not isinstance(v, int) or v < 1:
            raise ValueError(f"distance는 1 이상이어야 합니다 (피벗은 자기 자신의 이웃이 아님): {v}")
        return v

    @root_validator(skip_on_failure=True)
    def validate_sampling(cls, values):
        sampling = values["sampling"]
        if sampling == SamplingMode.STANDARD:
            if values.get("alpha") not in (None, 0.0):
                raise ValueError("standard 샘플링에서는 alpha가 의미 없습니다 (0만 허용).")
            if values["distance"] == ExperimentDefaults.UNBOUNDED_DISTANCE:
                raise ValueError("distance 'inf'는 context 샘플링에서만 쓸 수 있습니다.")
            values["alpha"] = 0.0
        elif values.get("alpha") is None:
            values["alpha"] = 0.5
        return values

    @property
    def distance_cap(self) -> Optional[int]:
        return None if self.distance == ExperimentDefaults.UNBOUNDED_DISTANCE else int(self.distance)

    @property
    def distance_label(self) -> str:
        if self.sampling == SamplingMode.STANDARD:
            return NO_DISTANCE
        return format_distance(self.distance_cap)

    def train_config(self, seed: int) -> TrainConfig:
        """시드 하나에 대한 사전학습 설정"""
        loss = self.train.loss.copy(update={"method": self.method, "alpha": self.alpha})
        sampler = self.train.sampler.copy(update={"mode": self.sampling, "distance_cap": self.distance_cap})
        return self.train.copy(update={"seed": seed, "loss": loss, "sampler": sampler})

    def variant(self, **changes) -> "ExperimentConfig":
        """필드를 바꾼 설정을 다시 검증해 생성"""
        data = self.dict()
        data.update(changes)
        return ExperimentConfig(**data)


class ExperimentResult(BaseModel):
    """결과 표 한 행 (CSV 컬럼 순서와 같음)"""
    dataset_id: str
    method: str
    sampling: str
    alpha: float = Field(..., ge=0.0, le=1.0)
    d: str
    seed: int
    probe_accuracy: float = Field(..., ge=0.0, le=1.0)
    probe_auroc: Optional[float] = Field(None, ge=0.0, le=1.0)
    mil_accuracy: float = Field(..., ge=0.0, le=1.0)
    mil_auroc: Optional[float] = Field(None, ge=0.0, le=1.0)
    wall_time: float = Field(..., ge=0.0)

    @validator("d", pre=True)
    def coerce_distance(cls, v):
        return str(v)

    @validator("probe_auroc", "mil_auroc", pre=True)
    def empty_to_none(cls, v):
        if v is None or v == "" or (isinstance(v, float) and v != v):
            return None
        return v
