"""
가상 슬라이드 생성 관련 스키마
"""
from typing import Dict, List

from pydantic import BaseModel, Field, root_validator, validator


class ClassPrototype(BaseModel):
    """클래스별 텍스처 원형"""
    base: List[float] = Field(..., min_items=1, description="채널별 기본 밝기 (0~1)")
    frequency: float = Field(..., gt=0, description="패치 안 사인파 주파수 (패치 폭당 주기 수)")

    @validator("base", each_item=True)
    def validate_base(cls, v):
        if not 0.0 <= v <= 1.0:
            raise ValueError("기본 밝기는 0~1 범위여야 합니다.")
        return v


def _default_prototypes() -> List[ClassPrototype]:
    return [
        ClassPrototype(base=[0.75, 0.55, 0.70], frequency=1.0),  # Benign
        ClassPrototype(base=[0.60, 0.45, 0.65], frequency=2.0),  # Dysplasia
        ClassPrototype(base=[0.45, 0.30, 0.60], frequency=4.0),  # Malignant
    ]


class GenConfig(BaseModel):
    """가상 슬라이드 생성 설정"""
    rows: int = Field(32, ge=1, description="격자 행 수")
    cols: int = Field(32, ge=1, description="격자 열 수")
    patch_height: int = Field(16, ge=4, description="패치 높이 (픽셀)")
    patch_width: int = Field(16, ge=4, description="패치 너비 (픽셀)")
    channels: int = Field(3, ge=1, description="채널 수")
    lesion_count_min: int = Field(1, ge=1, description="최소 병변 수")
    lesion_count_max: int = Field(3, ge=1, description="최대 병변 수")
    lesion_radius_min: int = Field(3, ge=0, description="최소 병변 반지름 (격자 칸)")
    lesion_radius_max: int = Field(7, ge=0, description="최대 병변 반지름 (격자 칸)")
    prototypes: List[ClassPrototype] = Field(default_factory=_default_prototypes, description="클래스별 텍스처 원형")
    texture_amplitude: float = Field(0.15, ge=0.0, lt=1.0, description="패치 텍스처 사인파 진폭")
    nuisance_amplitude: float = Field(0.15, ge=0.0, lt=1.0, description="슬라이드 전역 저주파 밝기 변동 진폭")
    noise_std: float = Field(0.05, ge=0.0, description="픽셀 잡음 표준편차")
    seed: int = Field(0, ge=0, description="생성 시드")

    @root_validator(skip_on_failure=True)
    def validate_ranges(cls, values):
        if values["lesion_count_min"] > values["lesion_count_max"]:
            raise ValueError("lesion_count 범위가 비어 있습니다.")
        if values["lesion_radius_min"] > values["lesion_radius_max"]:
            raise ValueError("lesion_radius 범위가 비어 있습니다.")
        prototypes = values["prototypes"]
        if len(prototypes) != 3:
            raise ValueError("prototypes는 Benign, Dysplasia, Malignant 3개여야 합니다.")
        if any(len(p.base) != values["channels"] for p in prototypes):
            raise ValueError("prototype의 채널 수가 channels와 다릅니다.")
        return values

    @property
    def patch_shape(self):
        return self.patch_height, self.patch_width, self.channels


class ClassCounts(BaseModel):
    """분할 하나의 클래스별 슬라이드 수"""
    benign: int = Field(10, ge=0)
    dysplasia: int = Field(10, ge=0)
    malignant: int = Field(10, ge=0)

    def as_list(self) -> List[int]:
        return [self.benign, self.dysplasia, self.malignant]

    @property
    def total(self) -> int:
        return sum(self.as_list())


class SplitCounts(BaseModel):
    """train/val/test 분할별 클래스 수"""
    train: ClassCounts = Field(default_factory=ClassCounts)
    val: ClassCounts = Field(default_factory=lambda: ClassCounts(benign=3, dysplasia=3, malignant=3))
    test: ClassCounts = Field(default_factory=lambda: ClassCounts(benign=3, dysplasia=3, malignant=3))


class GenerateSummary(BaseModel):
    """generate 명령 응답"""
    dataset_id: str
    manifest: str
    slides: Dict[str, int]
    dataset_hash: str
    prototype_separation: float = Field(..., description="benign/malignant 기준색 평균 차이")
