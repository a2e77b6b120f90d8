import json
import math
from typing import Any

import numpy as np
import pandas as pd


class BaseUtil:
    SUCCESS = "SUCCESS"

    @staticmethod
    def to_plain(value: Any) -> Any:
        """numpy/pandas 값을 JSON 직렬화 가능한 값으로 (NaN → None)"""
        if isinstance(value, pd.DataFrame):
            return json.loads(value.to_json(orient="records"))
        if isinstance(value, dict):
            return {str(k): BaseUtil.to_plain(v) for k, v in value.items()}
        if isinstance(value, (list, tuple)):
            return [BaseUtil.to_plain(v) for v in value]
        if isinstance(value, np.ndarray):
            return BaseUtil.to_plain(value.tolist())
        if isinstance(value, np.generic):
            value = value.item()
        if isinstance(value, float) and not math.isfinite(value):
            return None
        return value

    @staticmethod
    def to_json(value: Any) -> str:
        return json.dumps(BaseUtil.to_plain(value), ensure_ascii=False, default=str)
