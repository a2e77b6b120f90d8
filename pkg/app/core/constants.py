"""
공통 상수 및 설정
"""
from typing import Final, Tuple


# 프로세스 종료 코드
class ExitCodes:
    SUCCESS: Final[int] = 0
    COMPUTATION: Final[int] = 1
    CONFIG: Final[int] = 2
    DATA_FORMAT: Final[int] = 3
    NUMERICAL: Final[int] = 4


# 명령 응답 메시지
class ResponseMessages:
    DATASET_SAVED: Final[str] = "데이터셋이 저장되었습니다."
    ENCODER_SAVED: Final[str] = "인코더가 저장되었습니다."
    RESULTS_APPENDED: Final[str] = "실험 결과가 기록되었습니다."


# 슬라이드 바이너리 파일 형식
class SlideFileFormat:
    MAGIC: Final[bytes] = b"CSSL"
    VERSION: Final[int] = 1
    HEADER_STRUCT: Final[str] = "<4sIIIIII"  # magic, version, rows, cols, H, W, C
    PATCH_DTYPE: Final[str] = "<f4"
    LABEL_DTYPE: Final[str] = "u1"
    MANIFEST_NAME: Final[str] = "manifest.json"
    MANIFEST_VERSION: Final[str] = "cssl-dataset-1.0.0"


# 수치 상수
class Numerics:
    STANDARDIZE_EPSILON: Final[float] = 1e-8
    GRAD_CHECK_FLOOR: Final[float] = 1e-12
    MAX_PIVOT_RETRIES: Final[int] = 10


# 실험 기본값
class ExperimentDefaults:
    ALPHA_SWEEP: Final[Tuple[float, ...]] = (0.0, 0.25, 0.5, 0.75, 1.0)
    DISTANCE_SWEEP: Final[Tuple[int, ...]] = (1, 2, 4, 8)
    DISTANCE_SWEEP_ALPHA: Final[float] = 0.5
    UNBOUNDED_DISTANCE: Final[str] = "inf"


# 결과 CSV 컬럼 (순서 고정)
RESULT_COLUMNS: Final[Tuple[str, ...]] = (
    "dataset_id",
    "method",
    "sampling",
    "alpha",
    "d",
    "seed",
    "probe_accuracy",
    "probe_auroc",
    "mil_accuracy",
    "mil_auroc",
    "wall_time",
)

# 같은 실행으로 보는 결과 행의 키
RESULT_KEY_COLUMNS: Final[Tuple[str, ...]] = ("dataset_id", "method", "sampling", "alpha", "d", "seed")
