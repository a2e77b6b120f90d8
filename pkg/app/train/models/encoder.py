"""
퍼셉트론 인코더 구조 정의
"""
from dataclasses import asdict, dataclass
from typing import Dict, List, Tuple

import numpy as np

# 레이어 이름 → 배열 ("<layer>_w": [fan_in×fan_out], "<layer>_b": [fan_out])
EncoderParams = Dict[str, np.ndarray]


@dataclass(frozen=True)
class EncoderDims:
    """입력(H·W·C) → 64 → 64 → 임베딩 32, projector 32 → 32 → 16, predictor 16 → 16"""
    input_dim: int
    hidden_dims: Tuple[int, ...] = (64, 64)
    embedding_dim: int = 32
    projector_hidden: int = 32
    projection_dim: int = 16
    predictor: bool = False

    def encoder_layers(self) -> List[Tuple[str, int, int]]:
        sizes = [self.input_dim, *self.hidden_dims, self.embedding_dim]
        return [(f"enc{i}", sizes[i], sizes[i + 1]) for i in range(len(sizes) - 1)]

    def projector_layers(self) -> List[Tuple[str, int, int]]:
        return [
            ("proj0", self.embedding_dim, self.projector_hidden),
            ("proj1", self.projector_hidden, self.projection_dim),
        ]

    def predictor_layers(self) -> List[Tuple[str, int, int]]:
        return [("pred0", self.projection_dim, self.projection_dim)] if self.predictor else []

    def layers(self) -> List[Tuple[str, int, int]]:
        return self.encoder_layers() + self.projector_layers() + self.predictor_layers()

    def to_dict(self) -> dict:
        data = asdict(self)
        data["hidden_dims"] = list(self.hidden_dims)
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "EncoderDims":
        return cls(**{**data, "hidden_dims": tuple(data.get("hidden_dims", (64, 64)))})


@dataclass
class EncodedBatch:
    """embedding: projector 이전 [N×32], projection: projector 출력 [N×16]"""
    embedding: np.ndarray
    projection: np.ndarray


@dataclass
class PretrainResult:
    params: EncoderParams
    dims: EncoderDims
    target_params: Dict[str, np.ndarray]
    epoch_losses: List[float]
    step_losses: List[float]
