"""estimate - 샘플 파일에서 WW 추정값 계산"""

import argparse
import logging
from typing import Any

from app.cli.arguments import add_common_arguments, common_overrides
from app.schemas.run_config import EstimateConfig, OutputFormat
from app.services.bandwidths import BandwidthSchedule
from app.services.estimator import EvaluationGrid, ww_evaluate
from app.services.kernels import kernel_by_name
from app.services.selection import selection_grid
from app.utils.config_loader import write_sidecar
from app.utils.sample_io import read_sample
from app.utils.writers import emit, estimate_csv, render_json

logger = logging.getLogger(__name__)

COMMAND = "estimate"


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser(COMMAND, help="evaluate the recursive estimator on a grid")
    add_common_arguments(parser)
    parser.add_argument("input", nargs="?", help="sample file, one value per line (default: stdin)")
    parser.add_argument("--gamma", type=float, help="bandwidth exponent, h_k = k^-gamma")
    parser.add_argument(
        "--fixed-h", dest="fixed_h", type=float, help="constant bandwidth (Parzen-Rosenblatt)"
    )
    parser.add_argument("--range", nargs=2, type=float, metavar=("A", "B"))
    parser.add_argument("--points", type=int)
    parser.set_defaults(command=COMMAND, handler=run, overrides=overrides)


def overrides(args: argparse.Namespace) -> dict[str, Any]:
    a, b = args.range if args.range else (None, None)
    return {
        **common_overrides(args),
        "input": args.input,
        "gamma": args.gamma,
        "fixed_h": args.fixed_h,
        "a": a,
        "b": b,
        "points": args.points,
    }


def run(config: EstimateConfig) -> None:
    sample = read_sample(config.input)
    kernel = kernel_by_name(config.kernel)
    if config.fixed_h is not None:
        schedule = BandwidthSchedule.constant(config.fixed_h)
    else:
        schedule = BandwidthSchedule.power_law(config.gamma)

    if config.a is not None and config.b is not None:
        grid = EvaluationGrid.linspace(config.a, config.b, config.points)
    else:
        grid = selection_grid(sample, kernel, config.points, config.extension_sd)

    values = ww_evaluate(sample, kernel, schedule, grid)
    logger.info(
        "Estimated n=%s kernel=%s %s=%s on %s points",
        len(sample), kernel.name, schedule.kind.value, schedule.parameter, len(grid),
    )

    if config.format == OutputFormat.JSON:
        text = render_json(
            {
                "n": len(sample),
                "kernel": kernel.name,
                "schedule": schedule.kind.value,
                "parameter": schedule.parameter,
                "x": grid.points.tolist(),
                "f_hat": values.tolist(),
            }
        )
    else:
        text = estimate_csv(grid.points, values)
    emit(text, config.out)
    write_sidecar(COMMAND, config, config.out)
