from typing import Optional

from app.core.constants import ExitCodes


class BaseLabException(Exception):
    def __init__(
            self,
            exit_code: int,
            custom_code: str,
            message: str,
            details: Optional[dict] = None
    ):
        self.exit_code = exit_code
        self.custom_code = custom_code
        self.message = message
        self.details = details or {}
        super().__init__(self.message)

    def with_context(self, **context) -> "BaseLabException":
        """실행 컨텍스트(method, seed 등)를 details에 덧붙인다"""
        self.details.update(context)
        return self


# =========================
# 설정 오류 (exit 2)
# =========================
class ConfigException(BaseLabException):
    def __init__(self, message: str = "잘못된 설정입니다.", details: Optional[dict] = None):
        super().__init__(
            exit_code=ExitCodes.CONFIG,
            custom_code="CONFIG",
            message=message,
            details=details
        )


class GeometryException(ConfigException):
    def __init__(self, message: str = "격자에 들어갈 수 없는 병변 크기입니다.", details: Optional[dict] = None):
        super().__init__(message=message, details=details)
        self.custom_code = "GEOMETRY"


# =========================
# 데이터 형식 오류 (exit 3)
# =========================
class DataFormatException(BaseLabException):
    def __init__(self, message: str = "데이터 형식 오류입니다.", details: Optional[dict] = None,
                 custom_code: str = "DATA_FORMAT"):
        super().__init__(
            exit_code=ExitCodes.DATA_FORMAT,
            custom_code=custom_code,
            message=message,
            details=details
        )


class BadMagicException(DataFormatException):
    def __init__(self, message: str = "슬라이드 파일의 매직 바이트가 올바르지 않습니다.", details: Optional[dict] = None):
        super().__init__(message=message, details=details, custom_code="BAD_MAGIC")


class VersionMismatchException(DataFormatException):
    def __init__(self, message: str = "지원하지 않는 슬라이드 파일 버전입니다.", details: Optional[dict] = None):
        super().__init__(message=message, details=details, custom_code="VERSION_MISMATCH")


class TruncatedFileException(DataFormatException):
    def __init__(self, message: str = "헤더 크기와 본문 길이가 일치하지 않습니다.", details: Optional[dict] = None):
        super().__init__(message=message, details=details, custom_code="TRUNCATED")


# =========================
# 수치 오류 (exit 4)
# =========================
class NumericalException(BaseLabException):
    def __init__(self, message: str = "수치 계산 오류가 발생했습니다.", details: Optional[dict] = None,
                 custom_code: str = "NUMERICAL"):
        super().__init__(
            exit_code=ExitCodes.NUMERICAL,
            custom_code=custom_code,
            message=message,
            details=details
        )


class NonFiniteLossException(NumericalException):
    def __init__(self, step: int, method: str, value: float, details: Optional[dict] = None):
        super().__init__(
            message=f"손실 값이 유한하지 않습니다 (step={step}, method={method}, loss={value})",
            details={"step": step, "method": method, **(details or {})},
            custom_code="NON_FINITE_LOSS"
        )


# =========================
# 연산 오류 (exit 1)
# =========================
class ComputationException(BaseLabException):
    def __init__(self, message: str = "연산 중 오류가 발생했습니다.", details: Optional[dict] = None,
                 custom_code: str = "COMPUTATION"):
        super().__init__(
            exit_code=ExitCodes.COMPUTATION,
            custom_code=custom_code,
            message=message,
            details=details
        )


class DimensionException(ComputationException):
    def __init__(self, message: str = "텐서 차원이 맞지 않습니다.", details: Optional[dict] = None):
        super().__init__(message=message, details=details, custom_code="DIMENSION")


class RankException(ComputationException):
    def __init__(self, message: str = "스칼라 손실만 역전파할 수 있습니다.", details: Optional[dict] = None):
        super().__init__(message=message, details=details, custom_code="RANK")


class InvalidAxisException(ComputationException):
    def __init__(self, message: str = "유효하지 않은 축입니다.", details: Optional[dict] = None):
        super().__init__(message=message, details=details, custom_code="INVALID_AXIS")


class DegenerateBatchException(ComputationException):
    def __init__(self, message: str = "배치 크기가 2 미만입니다.", details: Optional[dict] = None):
        super().__init__(message=message, details=details, custom_code="DEGENERATE_BATCH")


class NormalizationException(ComputationException):
    def __init__(self, message: str = "노름이 0인 행은 정규화할 수 없습니다.", details: Optional[dict] = None):
        super().__init__(message=message, details=details, custom_code="NORMALIZATION")


class NonFiniteValueException(ComputationException):
    def __init__(self, message: str = "유한하지 않은 값이 있습니다.", details: Optional[dict] = None):
        super().__init__(message=message, details=details, custom_code="NON_FINITE")


class DomainException(ComputationException):
    def __init__(self, message: str = "서로 다른 슬라이드의 좌표는 비교할 수 없습니다.", details: Optional[dict] = None):
        super().__init__(message=message, details=details, custom_code="DOMAIN")


class NoNeighborException(ComputationException):
    def __init__(self, message: str = "거리 제한 안에 이웃 패치가 없습니다.", details: Optional[dict] = None):
        super().__init__(message=message, details=details, custom_code="NO_NEIGHBOR")


class BatchException(ComputationException):
    def __init__(self, message: str = "배치를 구성할 수 없습니다.", details: Optional[dict] = None):
        super().__init__(message=message, details=details, custom_code="BATCH")


class UndefinedRateException(ComputationException):
    def __init__(self, message: str = "해당 거리의 패치 쌍이 없습니다.", details: Optional[dict] = None):
        super().__init__(message=message, details=details, custom_code="UNDEFINED_RATE")


class UndefinedMetricException(ComputationException):
    def __init__(self, message: str = "두 클래스가 모두 있어야 합니다.", details: Optional[dict] = None):
        super().__init__(message=message, details=details, custom_code="UNDEFINED_METRIC")


class EmptyBagException(ComputationException):
    def __init__(self, message: str = "빈 bag입니다.", details: Optional[dict] = None):
        super().__init__(message=message, details=details, custom_code="EMPTY_BAG")


class SingleClassException(ComputationException):
    def __init__(self, message: str = "학습 데이터에 클래스가 하나뿐입니다.", details: Optional[dict] = None):
        super().__init__(message=message, details=details, custom_code="SINGLE_CLASS")


class MissingClassException(ComputationException):
    def __init__(self, message: str = "학습 데이터에 없는 클래스가 있습니다.", details: Optional[dict] = None):
        super().__init__(message=message, details=details, custom_code="MISSING_CLASS")


class NoQualifyingSlidesException(ComputationException):
    def __init__(self, message: str = "비양성(non-benign) 슬라이드가 없습니다.", details: Optional[dict] = None):
        super().__init__(message=message, details=details, custom_code="NO_QUALIFYING_SLIDES")


class FrozenEncoderException(ComputationException):
    def __init__(self, message: str = "고정된 인코더 파라미터가 변경되었습니다.", details: Optional[dict] = None):
        super().__init__(message=message, details=details, custom_code="FROZEN_ENCODER")
