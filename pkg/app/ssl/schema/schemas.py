"""
SSL 손실 설정 스키마
"""
from enum import Enum

from pydantic import BaseModel, Field


class SSLMethod(str, Enum):
    BARLOW_TWINS = "bt"
    BYOL = "byol"
    VICREG = "vicreg"


class CombinedLossConfig(BaseModel):
    """α 가중 결합 손실과 방법별 하이퍼파라미터"""
    alpha: float = Field(0.5, ge=0.0, le=1.0, description="contextual 항 가중치 α")
    method: SSLMethod = Field(SSLMethod.BARLOW_TWINS, description="bt, byol, vicreg")
    bt_lambda: float = Field(0.005, gt=0, description="Barlow Twins 비대각 가중치 λ")
    vicreg_invariance: float = Field(25.0, ge=0, description="VICReg λ_inv")
    vicreg_variance: float = Field(25.0, ge=0, description="VICReg μ_var")
    vicreg_covariance: float = Field(1.0, ge=0, description="VICReg ν_cov")
    vicreg_gamma: float = Field(1.0, gt=0, description="VICReg 목표 표준편차 γ")
    vicreg_epsilon: float = Field(1e-4, gt=0, description="VICReg 분산 안정화 ε")
    byol_tau: float = Field(0.99, ge=0.0, le=1.0, description="BYOL EMA 계수 τ")
