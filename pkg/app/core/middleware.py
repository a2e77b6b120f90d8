import logging
from typing import Any

import click
from pydantic import ValidationError

from app.base.base_response import BaseResponse
from app.core.constants import ExitCodes
from app.core.exceptions import BaseLabException

logger = logging.getLogger(__name__)


def _fail(exit_code: int, message: str, details: dict = None) -> None:
    click.echo(BaseResponse[Any].of_fail(exit_code, message, details).to_json_line(), err=True)


class ExceptionHandlingGroup(click.Group):
    """
    명령 예외를 종료 코드와 실패 응답으로 변환하는 click 그룹

    BaseLabException → 예외의 exit_code, pydantic 검증 오류 → 2, 그 외 → 1
    """

    def invoke(self, ctx: click.Context):
        try:
            return super().invoke(ctx)
        except (click.exceptions.Exit, click.exceptions.Abort, click.ClickException):
            raise
        except BaseLabException as exc:
            logger.error(f"Lab Exception: {exc.custom_code} - {exc.message}")
            _fail(exc.exit_code, exc.message, {"code": exc.custom_code, **exc.details})
            ctx.exit(exc.exit_code)
        except ValidationError as exc:
            logger.error(f"Validation Error: {exc}")
            _fail(ExitCodes.CONFIG, "설정 검증에 실패했습니다.", {"errors": exc.errors()})
            ctx.exit(ExitCodes.CONFIG)
        except Exception as exc:
            logger.error(f"Unexpected Error: {str(exc)}", exc_info=True)
            _fail(ExitCodes.COMPUTATION, "예상치 못한 오류가 발생했습니다.")
            ctx.exit(ExitCodes.COMPUTATION)
