"""
하류 평가 설정 스키마
"""
from pydantic import BaseModel, Field


class EvalConfig(BaseModel):
    """선형 프로빙, ABMIL, 지도학습 기준선 설정"""
    num_classes: int = Field(3, ge=2, description="클래스 수")

    probe_train_per_class: int = Field(500, ge=1, description="클래스당 프로빙 학습 패치 수")
    probe_val_per_class: int = Field(250, ge=1, description="클래스당 프로빙 검증 패치 수")
    probe_test_per_class: int = Field(250, ge=1, description="클래스당 프로빙 테스트 패치 수")
    probe_learning_rate: float = Field(0.1, gt=0, description="프로빙 학습률")
    probe_momentum: float = Field(0.9, ge=0.0, lt=1.0, description="프로빙 모멘텀")
    probe_weight_decay: float = Field(0.0, ge=0.0, description="프로빙 가중치 감쇠")
    probe_epochs: int = Field(100, ge=1, description="프로빙 에폭 수")
    probe_batch_size: int = Field(128, ge=1, description="프로빙 미니배치 크기")

    mil_hidden: int = Field(32, ge=1, description="ABMIL attention 은닉 크기 h")
    mil_learning_rate: float = Field(0.01, gt=0, description="ABMIL 학습률")
    mil_momentum: float = Field(0.9, ge=0.0, lt=1.0, description="ABMIL 모멘텀")
    mil_weight_decay: float = Field(1e-2, ge=0.0, description="ABMIL 가중치 감쇠")
    mil_epochs: int = Field(50, ge=1, description="ABMIL 에폭 수")

    supervised_learning_rate: float = Field(0.05, gt=0, description="지도학습 기준선 학습률")
    supervised_momentum: float = Field(0.9, ge=0.0, lt=1.0, description="지도학습 기준선 모멘텀")
    supervised_epochs: int = Field(30, ge=1, description="지도학습 기준선 에폭 수")
    supervised_batch_size: int = Field(128, ge=1, description="지도학습 기준선 미니배치 크기")

    shuffle_labels: bool = Field(False, description="학습 라벨을 섞는 우연 수준 대조군")
