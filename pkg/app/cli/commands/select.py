"""select - LMR 또는 GL 로 대역폭 파라미터 선택"""

import argparse
import logging
from typing import Any

from app.cli.arguments import add_common_arguments, common_overrides, companion_path
from app.core.config import settings
from app.core.errors import InvalidArgumentError
from app.schemas.run_config import OutputFormat, SelectConfig
from app.schemas.selection import SelectionMethod, SelectionResult
from app.services.bandwidths import GridKind, make_grid
from app.services.kernels import kernel_by_name
from app.services.selection import gl_select, lmr_select, selection_grid
from app.utils.config_loader import write_sidecar
from app.utils.sample_io import read_sample
from app.utils.writers import emit, render_json, selection_csv

logger = logging.getLogger(__name__)

COMMAND = "select"


def default_grid_kind(method: SelectionMethod) -> GridKind:
    """LMR: ``settings.GRID_KIND``, GL: sqrt_log_gl"""
    if method == SelectionMethod.GL:
        return GridKind.SQRT_LOG_GL
    return GridKind(settings.GRID_KIND)


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser(COMMAND, help="choose gamma (or h) from a sample")
    add_common_arguments(parser)
    parser.add_argument("input", nargs="?", help="sample file, one value per line (default: stdin)")
    parser.add_argument("--method", choices=[m.value for m in SelectionMethod])
    parser.add_argument(
        "--grid-kind", dest="grid_kind", choices=[k.value for k in GridKind]
    )
    parser.add_argument("--grid-size", dest="grid_size", type=int)
    parser.add_argument("--gamma-max", dest="gamma_max", type=float)
    parser.add_argument("--upsilon", type=float)
    parser.add_argument("--points", type=int)
    parser.set_defaults(command=COMMAND, handler=run, overrides=overrides)


def overrides(args: argparse.Namespace) -> dict[str, Any]:
    return {
        **common_overrides(args),
        "input": args.input,
        "method": args.method,
        "grid_kind": args.grid_kind,
        "grid_size": args.grid_size,
        "gamma_max": args.gamma_max,
        "upsilon": args.upsilon,
        "points": args.points,
    }


def select(config: SelectConfig) -> SelectionResult:
    sample = read_sample(config.input)
    kernel = kernel_by_name(config.kernel)
    kind = GridKind(config.grid_kind) if config.grid_kind else default_grid_kind(config.method)
    grid = make_grid(kind, n=len(sample), size=config.grid_size, gamma_max=config.gamma_max)
    eval_grid = selection_grid(sample, kernel, config.points, config.extension_sd)

    if config.method == SelectionMethod.GL:
        if grid.is_fixed_h:
            raise InvalidArgumentError("GL selection needs a gamma grid")
        return gl_select(sample, kernel, grid, config.upsilon, eval_grid)
    return lmr_select(sample, kernel, grid, eval_grid)


def run(config: SelectConfig) -> None:
    result = select(config)
    logger.info(
        "%s selected %s=%r (n=%s, kernel=%s)",
        result.method.value.upper(), result.parameter, result.chosen_gamma, result.n, result.kernel,
    )
    rendered = {
        OutputFormat.JSON: render_json(result),
        OutputFormat.CSV: selection_csv(result),
    }
    emit(rendered[config.format], config.out)
    if config.out is not None and config.out != "-":
        other = OutputFormat.CSV if config.format == OutputFormat.JSON else OutputFormat.JSON
        emit(rendered[other], companion_path(config.out, config.format))
    write_sidecar(COMMAND, config, config.out)
