"""
결과 CSV 및 에폭별 지표 JSONL 기록
"""
import json
import logging
import threading
from pathlib import Path
from typing import List, Sequence

import pandas as pd

from app.core.constants import RESULT_COLUMNS, RESULT_KEY_COLUMNS
from app.core.exceptions import DataFormatException
from app.experiments.schema.schemas import ExperimentResult

logger = logging.getLogger(__name__)


def read_results_frame(path: Path) -> pd.DataFrame:
    """결과 CSV 읽기 (없으면 빈 표)"""
    path = Path(path)
    if not path.exists():
        return pd.DataFrame(columns=list(RESULT_COLUMNS))
    frame = pd.read_csv(path, dtype={"dataset_id": str, "method": str, "sampling": str, "d": str})
    missing = [column for column in RESULT_COLUMNS if column not in frame.columns]
    if missing:
        raise DataFormatException(f"결과 CSV에 없는 컬럼이 있습니다: {missing}", details={"path": str(path)})
    return frame


def read_results(path: Path) -> List[ExperimentResult]:
    """결과 CSV를 ExperimentResult 목록으로 파싱"""
    frame = read_results_frame(path)
    return [ExperimentResult(**row) for row in frame[list(RESULT_COLUMNS)].to_dict(orient="records")]


def results_frame(results: Sequence[ExperimentResult]) -> pd.DataFrame:
    return pd.DataFrame([result.dict() for result in results], columns=list(RESULT_COLUMNS))


class ResultsWriter:
    """
    결과 CSV 추가 기록기

    같은 키(dataset_id, method, sampling, alpha, d, seed)의 행이 이미 있으면
    force일 때만 덮어쓴다. 여러 워커가 공유해도 기록은 직렬화된다.
    """

    def __init__(self, path: Path, force: bool = False):
        self.path = Path(path)
        self.force = force
        self._lock = threading.Lock()

    def append(self, results: Sequence[ExperimentResult]) -> int:
        """
        결과 행 추가

        Returns:
            실제로 기록한 행 수
        """
        if not results:
            return 0
        with self._lock:
            existing = read_results_frame(self.path)
            incoming = results_frame(results)
            keys = list(RESULT_KEY_COLUMNS)

            existing_keys = set(map(tuple, existing[keys].astype(str).values.tolist()))
            incoming_keys = list(map(tuple, incoming[keys].astype(str).values.tolist()))
            duplicated = [key in existing_keys for key in incoming_keys]

            if self.force:
                replaced = set(k for k, dup in zip(incoming_keys, duplicated) if dup)
                if replaced:
                    keep = [tuple(row) not in replaced for row in existing[keys].astype(str).values.tolist()]
                    existing = existing[keep]
                    logger.warning(f"기존 결과 {len(replaced)}행을 덮어씁니다 (--force)")
            else:
                skipped = sum(duplicated)
                if skipped:
                    logger.warning(f"이미 기록된 결과 {skipped}행은 건너뜁니다 (덮어쓰려면 --force)")
                incoming = incoming[[not dup for dup in duplicated]]

            frames = [frame for frame in (existing, incoming) if not frame.empty]
            merged = pd.concat(frames, ignore_index=True) if frames else incoming
            self.path.parent.mkdir(parents=True, exist_ok=True)
            merged[list(RESULT_COLUMNS)].to_csv(self.path, index=False)

            logger.info(f"결과 {len(incoming)}행 기록: {self.path}")
            return len(incoming)


class MetricsStream:
    """에폭별 손실 JSON-lines 스트림 ({"epoch": …, "loss": …})"""

    def __init__(self, path: Path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self.path.write_text("", encoding="utf-8")

    def write(self, epoch: int, loss: float) -> None:
        with open(self.path, "a", encoding="utf-8") as f:
            f.write(json.dumps({"epoch": int(epoch), "loss": float(loss)}) + "\n")

    def __call__(self, epoch: int, loss: float) -> None:
        self.write(epoch, loss)

    def read(self) -> List[dict]:
        with open(self.path, "r", encoding="utf-8") as f:
            return [json.loads(line) for line in f if line.strip()]
