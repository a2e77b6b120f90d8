"""
애플리케이션 팩토리
"""
import logging

import click

from config import settings
from app.core.middleware import ExceptionHandlingGroup
from app.slidegen.routers.router import router as slidegen_router
from app.train.routers.router import router as train_router
from app.eval.routers.router import router as eval_router
from app.experiments.routers.router import router as experiments_router

# 로깅 설정
logging.basicConfig(
    level=getattr(logging, settings.log_level.upper(), logging.INFO),
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    datefmt='%Y-%m-%d %H:%M:%S'
)

logger = logging.getLogger(__name__)


def include_router(app: click.Group, router: click.Group) -> None:
    """도메인 라우터의 명령을 최상위 그룹에 평평하게 등록"""
    for name, command in router.commands.items():
        if name in app.commands:
            raise ValueError(f"명령 이름이 중복됩니다: {name}")
        app.add_command(command, name)


def create_app() -> click.Group:
    """click 명령 그룹 생성"""

    @click.group(
        cls=ExceptionHandlingGroup,
        help=f"Contextual SSL Lab - {settings.active_profile.upper()} Environment",
    )
    @click.version_option("1.0.0", prog_name="cssl-lab")
    def app():
        logger.debug(f"실행 환경: {settings}")

    # 라우터 등록
    include_router(app, slidegen_router)
    include_router(app, train_router)
    include_router(app, eval_router)
    include_router(app, experiments_router)

    return app
