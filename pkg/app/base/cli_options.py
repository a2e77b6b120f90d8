"""
명령 공통 옵션과 응답 출력
"""
from pathlib import Path
from typing import Any, Callable, Dict, Optional

import click

from app.base.base_response import BaseResponse
from app.core.constants import ExitCodes
from app.ssl.schema.schemas import SSLMethod
from app.sampler.models.sampling import SamplingMode

METHOD_CHOICES = [method.value for method in SSLMethod]
SAMPLING_CHOICES = [mode.value for mode in SamplingMode]

config_option = click.option("--config", "config_path", type=click.Path(dir_okay=False, path_type=Path),
                             default=None, help="YAML 실험 설정 파일")
seed_option = click.option("--seed", type=click.IntRange(min=0), default=None, help="시드 (설정의 seeds 대신)")
out_option = click.option("--out", type=click.Path(path_type=Path), default=None, help="출력 디렉터리")
dataset_option = click.option("--dataset", type=click.Path(path_type=Path), default=None,
                              help="저장된 데이터셋 디렉터리")
force_option = click.option("--force", is_flag=True, default=False, help="같은 키의 기존 결과 행 덮어쓰기")
methods_option = click.option("--methods", type=str, default=None, help="쉼표로 구분한 방법 목록 (bt,byol,vicreg)")


def experiment_options(func: Callable) -> Callable:
    """--config, --seed, --out, --method, --sampling, --alpha, --distance, --dataset"""
    options = [
        config_option,
        seed_option,
        out_option,
        click.option("--method", type=click.Choice(METHOD_CHOICES), default=None, help="SSL 방법"),
        click.option("--sampling", type=click.Choice(SAMPLING_CHOICES), default=None, help="샘플링 모드"),
        click.option("--alpha", type=float, default=None, help="α (context 쌍 손실 가중치)"),
        click.option("--distance", type=str, default=None, help="체비셰프 거리 제한 (정수 또는 inf)"),
        dataset_option,
    ]
    for option in reversed(options):
        func = option(func)
    return func


def overrides_from(options: Dict[str, Any]) -> Dict[str, Any]:
    """명령 인자에서 설정 덮어쓰기 항목만 추출"""
    keys = ("seed", "method", "sampling", "alpha", "distance", "dataset")
    return {key: (str(options[key]) if key == "dataset" and options.get(key) else options.get(key)) for key in keys}


def respond(data: Any, message: Optional[str] = None) -> None:
    """성공 응답을 stdout에 JSON 한 줄로 출력"""
    if message:
        response = BaseResponse[Any].of(ExitCodes.SUCCESS, message, data)
    else:
        response = BaseResponse[Any].of_success(ExitCodes.SUCCESS, data)
    click.echo(response.to_json_line())
