"""공통 CLI 인자

플래그 기본값은 모두 ``None`` 이며, ``None`` 이 아닌 값만 설정 파일 값을 덮어씁니다.
"""

import argparse
from pathlib import Path
from typing import Any

from app.core.errors import ConfigError
from app.schemas.run_config import OutputFormat
from app.services.bandwidths import GridKind


def add_common_arguments(parser: argparse.ArgumentParser, kernel: bool = True) -> None:
    parser.add_argument("--config", help="TOML/JSON 설정 파일 (명령별 섹션)")
    parser.add_argument("--out", help="결과 파일 경로 (기본: 표준 출력)")
    parser.add_argument(
        "--format", choices=[f.value for f in OutputFormat], help="출력 형식"
    )
    parser.add_argument("--log-level", dest="log_level", help="로그 레벨 (stderr)")
    if kernel:
        parser.add_argument("--kernel", help="커널 이름 (K1, K3, K5, K7)")


def add_grid_arguments(parser: argparse.ArgumentParser) -> None:
    """몬테카를로 명령의 후보 격자 인자 (``grid`` 섹션)"""
    parser.add_argument(
        "--grid-kind", dest="grid_kind", choices=[k.value for k in GridKind],
        help="후보 격자 종류 (기본: 방법별)",
    )
    parser.add_argument("--grid-size", dest="grid_size", type=int)
    parser.add_argument("--gamma-max", dest="gamma_max", type=float)
    parser.add_argument("--h-max", dest="h_max", type=float)
    parser.add_argument("--upsilon", type=float)
    parser.add_argument("--eval-points", dest="eval_points", type=int)
    parser.add_argument("--selection-points", dest="selection_points", type=int)


def common_overrides(args: argparse.Namespace) -> dict[str, Any]:
    overrides = {
        "out": args.out,
        "format": args.format,
        "log_level": args.log_level,
    }
    if hasattr(args, "kernel"):
        overrides["kernel"] = args.kernel
    return overrides


def grid_overrides(args: argparse.Namespace) -> dict[str, Any]:
    keys = (
        "grid_kind", "grid_size", "gamma_max", "h_max", "upsilon", "eval_points", "selection_points",
    )
    grid = {
        key.removeprefix("grid_"): getattr(args, key)
        for key in keys
        if getattr(args, key) is not None
    }
    return {"grid": grid} if grid else {}


def companion_path(primary: str | Path, fmt: OutputFormat) -> Path:
    """``--out`` 와 짝을 이루는 다른 형식의 파일 경로"""
    other = ".csv" if fmt == OutputFormat.JSON else ".json"
    path = Path(primary)
    if path.suffix.lower() == other:
        raise ConfigError(f"--out {path} clashes with its companion {other} file")
    return path.with_suffix(other)
