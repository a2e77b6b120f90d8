"""
사전학습 설정 스키마
"""
from typing import Tuple

from pydantic import BaseModel, Field, root_validator

from app.augment.schema.schemas import AugmentConfig
from app.sampler.models.sampling import SamplingMode
from app.sampler.schema.schemas import SamplerConfig
from app.ssl.schema.schemas import CombinedLossConfig


class TrainConfig(BaseModel):
    """SSL 사전학습 설정 (SGD + momentum)"""
    learning_rate: float = Field(0.05, gt=0, description="학습률")
    momentum: float = Field(0.9, ge=0.0, lt=1.0, description="모멘텀")
    weight_decay: float = Field(1e-6, ge=0.0, description="가중치 감쇠 (사전학습 보강 기본값, 0이면 순수 SGD+모멘텀)")
    batch_size: int = Field(128, ge=2, description="배치당 피벗 수 M")
    epochs: int = Field(30, ge=1, description="에폭 수")
    steps_per_epoch: int = Field(10, ge=1, description="에폭당 스텝 수")
    seed: int = Field(0, ge=0, description="학습 시드")
    hidden_dims: Tuple[int, ...] = Field((64, 64), description="인코더 은닉층 크기")
    embedding_dim: int = Field(32, ge=1, description="projector 이전 임베딩 차원")
    projector_hidden: int = Field(32, ge=1, description="projector 은닉층 크기")
    projection_dim: int = Field(16, ge=1, description="projector 출력 차원")
    loss: CombinedLossConfig = Field(default_factory=CombinedLossConfig)
    sampler: SamplerConfig = Field(default_factory=SamplerConfig)
    augment: AugmentConfig = Field(default_factory=AugmentConfig)

    @root_validator(skip_on_failure=True)
    def validate_alpha_mode(cls, values):
        sampler, loss = values["sampler"], values["loss"]
        if sampler.mode == SamplingMode.STANDARD and loss.alpha != 0.0:
            raise ValueError("standard 샘플링에서는 alpha가 0이어야 합니다 (contextual 쌍이 없음).")
        return values
