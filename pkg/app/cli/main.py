"""wwkde - CLI Entry Point

재귀 커널 밀도 추정, 대역폭 파라미터 선택, 몬테카를로 실험 명령.
데이터는 표준 출력(또는 ``--out``)으로, 로그는 표준 에러로 나갑니다.
"""

import argparse
import logging
import sys
from typing import Sequence

from app.cli.commands import COMMANDS
from app.core.config import settings
from app.core.errors import exit_code_for
from app.utils.config_loader import resolve_config

logger = logging.getLogger("app.cli")

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=settings.APP_NAME,
        description="Recursive kernel density estimation with data-driven power-law bandwidths",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        command.register(subparsers)
    return parser


def configure_logging(level: str | None) -> None:
    """루트 로거를 stderr 로 설정 (stdout 은 결과 데이터 전용)"""
    name = (level or settings.LOG_LEVEL).upper()
    numeric = logging.getLevelName(name)
    if not isinstance(numeric, int):
        numeric = logging.INFO
    logging.basicConfig(format=LOG_FORMAT, stream=sys.stderr)
    logging.getLogger().setLevel(numeric)


def run(argv: Sequence[str] | None = None) -> int:
    """명령을 실행하고 종료 코드를 반환합니다."""
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)
    try:
        config = resolve_config(args.command, args.config, args.overrides(args))
        if config.log_level and config.log_level != args.log_level:
            configure_logging(config.log_level)
        args.handler(config)
    except Exception as exc:
        code = exit_code_for(exc)
        if code == 1:
            logger.exception("%s failed", args.command)
        else:
            logger.error("%s failed: %s", args.command, exc)
        return code
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
