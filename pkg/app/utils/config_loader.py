"""Run Config Loader - 설정 파일 + 환경 설정 + CLI 플래그 병합

우선순위: CLI 플래그 > 설정 파일의 명령 섹션 > 환경 설정(``settings``) > 모델 기본값.
설정 파일은 TOML 또는 JSON 이며 명령 이름을 키로 하는 섹션을 가집니다::

    [benchmark]
    densities = ["f1", "fm1"]
    n = [250, 1000]
    reps = 200

실행마다 기록되는 ``<out>.config.json`` 도 같은 형식이므로 ``--config`` 로
다시 넣으면 같은 실행이 재현됩니다.
"""

import json
import logging
import tomllib
from pathlib import Path
from typing import Any, Mapping

from pydantic import ValidationError

from app.core.config import settings
from app.core.errors import ConfigError
from app.schemas.experiment import GridParams
from app.schemas.run_config import COMMAND_CONFIGS, RunConfig
from app.utils.writers import render_json

logger = logging.getLogger(__name__)

SIDECAR_SUFFIX = ".config.json"


def settings_defaults(command: str) -> dict[str, Any]:
    """환경 설정에서 오는 명령별 기본값"""
    grid = GridParams(
        size=settings.GRID_SIZE,
        gamma_max=settings.GAMMA_MAX,
        upsilon=settings.UPSILON,
        selection_points=settings.SELECTION_POINTS,
        extension_sd=settings.EXTENSION_SD,
        eval_points=settings.EVAL_POINTS,
    ).model_dump()
    defaults: dict[str, dict[str, Any]] = {
        "estimate": {"extension_sd": settings.EXTENSION_SD},
        "select": {
            "grid_size": settings.GRID_SIZE,
            "gamma_max": settings.GAMMA_MAX,
            "upsilon": settings.UPSILON,
            "points": settings.SELECTION_POINTS,
            "extension_sd": settings.EXTENSION_SD,
        },
        "benchmark": {
            "kernels": [settings.DEFAULT_KERNEL],
            "reps": settings.REPLICATIONS,
            "seed": settings.SEED,
            "workers": settings.WORKERS,
            "grid": grid,
        },
        "frozen": {
            "reps": settings.REPLICATIONS,
            "seed": settings.SEED,
            "workers": settings.WORKERS,
            "grid": grid,
        },
        "trajectory": {
            "grid_size": settings.ONLINE_GRID_SIZE,
            "gamma_max": settings.GAMMA_MAX,
            "points": settings.ONLINE_POINTS,
            "seed": settings.SEED,
        },
        "stream": {
            "grid_size": settings.ONLINE_GRID_SIZE,
            "gamma_max": settings.GAMMA_MAX,
            "points": settings.ONLINE_POINTS,
            "extension_sd": settings.EXTENSION_SD,
            "snapshot_every": settings.STREAM_SNAPSHOT_EVERY,
        },
    }
    return {"kernel": settings.DEFAULT_KERNEL, **defaults[command]}


def read_config_file(path: str | Path, command: str) -> dict[str, Any]:
    """설정 파일에서 ``command`` 섹션을 읽습니다.

    Raises:
        OSError: 파일을 읽을 수 없는 경우
        ConfigError: 형식이 잘못되었거나 섹션이 표가 아닌 경우
    """
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    try:
        if path.suffix.lower() == ".json":
            document = json.loads(text)
        else:
            document = tomllib.loads(text)
    except (json.JSONDecodeError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc

    if not isinstance(document, dict):
        raise ConfigError(f"{path}: top level must be a table of command sections")
    unknown = set(document) - set(COMMAND_CONFIGS)
    if unknown:
        raise ConfigError(f"{path}: unknown sections {sorted(unknown)}")
    section = document.get(command, {})
    if not isinstance(section, dict):
        raise ConfigError(f"{path}: section [{command}] must be a table")
    return section


def _merge(base: dict[str, Any], override: Mapping[str, Any]) -> dict[str, Any]:
    merged = dict(base)
    for key, value in override.items():
        if isinstance(value, Mapping) and isinstance(merged.get(key), Mapping):
            merged[key] = _merge(dict(merged[key]), value)
        else:
            merged[key] = value
    return merged


def resolve_config(
    command: str,
    config_path: str | Path | None = None,
    overrides: Mapping[str, Any] | None = None,
) -> RunConfig:
    """설정을 병합하고 검증합니다. ``None`` 인 플래그는 무시합니다."""
    model = COMMAND_CONFIGS.get(command)
    if model is None:
        raise ConfigError(f"unknown command {command!r}")

    values = settings_defaults(command)
    if config_path is not None:
        values = _merge(values, read_config_file(config_path, command))
    flags = {k: v for k, v in (overrides or {}).items() if v is not None}
    values = _merge(values, flags)
    try:
        return model.model_validate(values)
    except ValidationError as exc:
        raise ConfigError(f"invalid {command} config: {exc}") from exc


def sidecar_path(out: str | Path) -> Path:
    return Path(f"{out}{SIDECAR_SUFFIX}")


def write_sidecar(command: str, config: RunConfig, out: str | Path | None) -> Path | None:
    """결과 옆에 최종 설정을 기록 (표준 출력으로 쓸 때는 생략)"""
    if out is None or str(out) == "-":
        return None
    path = sidecar_path(out)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(render_json({command: config.model_dump(mode="json")}), encoding="utf-8")
    logger.info("Resolved config written to %s", path)
    return path
