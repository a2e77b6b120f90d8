"""
분류 지표 (정확도, 순위 기반 AUROC)
"""
import logging
from typing import Sequence

import numpy as np
from scipy.stats import rankdata

from app.core.exceptions import DimensionException, UndefinedMetricException

logger = logging.getLogger(__name__)


def accuracy(predictions: Sequence[int], labels: Sequence[int]) -> float:
    """정확히 일치하는 비율"""
    predictions = np.asarray(predictions)
    labels = np.asarray(labels)
    if predictions.shape != labels.shape:
        raise DimensionException(f"예측({predictions.shape})과 라벨({labels.shape})의 길이가 다릅니다.")
    if labels.size == 0:
        raise UndefinedMetricException("빈 입력의 정확도는 정의되지 않습니다.")
    return float(np.mean(predictions == labels))


def auroc(scores: Sequence[float], labels: Sequence[int]) -> float:
    """
    Mann-Whitney U 기반 AUROC (동점은 평균 순위)

    Args:
        scores: 양성일수록 큰 점수
        labels: 0/1 라벨

    Returns:
        [0, 1] AUROC

    Raises:
        UndefinedMetricException: 한 클래스만 있을 때
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if scores.shape != labels.shape:
        raise DimensionException(f"점수({scores.shape})와 라벨({labels.shape})의 길이가 다릅니다.")
    positive = labels == 1
    n_pos = int(np.count_nonzero(positive))
    n_neg = int(labels.size - n_pos)
    if n_pos == 0 or n_neg == 0:
        raise UndefinedMetricException(
            "AUROC는 양성과 음성이 모두 있어야 합니다.",
            details={"positives": n_pos, "negatives": n_neg},
        )
    ranks = rankdata(scores, method="average")
    u_statistic = float(np.sum(ranks[positive])) - n_pos * (n_pos + 1) / 2.0
    return u_statistic / (n_pos * n_neg)


def macro_auroc(probabilities: np.ndarray, labels: Sequence[int]) -> float:
    """
    one-vs-rest AUROC의 클래스 평균

    라벨에 있는 클래스만 평균에 넣는다.

    Raises:
        UndefinedMetricException: 라벨에 클래스가 2개 미만일 때
    """
    probabilities = np.asarray(probabilities, dtype=np.float64)
    labels = np.asarray(labels)
    present = np.unique(labels)
    if present.size < 2:
        raise UndefinedMetricException("AUROC 계산에는 2개 이상의 클래스가 필요합니다.")
    return float(np.mean([auroc(probabilities[:, c], (labels == c).astype(int)) for c in present]))


def softmax_rows(logits: np.ndarray) -> np.ndarray:
    shifted = np.exp(logits - logits.max(axis=1, keepdims=True))
    return shifted / shifted.sum(axis=1, keepdims=True)
