"""trajectory - 관측값마다 다시 고른 gamma 의 궤적"""

import argparse
from typing import Any

from app.cli.arguments import add_common_arguments, common_overrides
from app.schemas.run_config import OutputFormat, TrajectoryConfig
from app.services.densities import SeededStream, density_by_name
from app.services.experiments import online_selection_protocol
from app.services.kernels import kernel_by_name
from app.utils.config_loader import write_sidecar
from app.utils.writers import emit, render_json, trajectory_csv

COMMAND = "trajectory"


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser(COMMAND, help="online re-selection of gamma on a simulated path")
    add_common_arguments(parser)
    parser.add_argument("--density")
    parser.add_argument("--n-start", dest="n_start", type=int)
    parser.add_argument("--n-end", dest="n_end", type=int)
    parser.add_argument("--grid-size", dest="grid_size", type=int)
    parser.add_argument("--gamma-max", dest="gamma_max", type=float)
    parser.add_argument("--points", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--stream-id", dest="stream_id", type=int)
    parser.set_defaults(command=COMMAND, handler=run, overrides=overrides)


def overrides(args: argparse.Namespace) -> dict[str, Any]:
    return {
        **common_overrides(args),
        "density": args.density,
        "n_start": args.n_start,
        "n_end": args.n_end,
        "grid_size": args.grid_size,
        "gamma_max": args.gamma_max,
        "points": args.points,
        "seed": args.seed,
        "stream_id": args.stream_id,
    }


def run(config: TrajectoryConfig) -> None:
    record = online_selection_protocol(
        density_by_name(config.density),
        kernel_by_name(config.kernel),
        config.n_start,
        config.n_end,
        grid_size=config.grid_size,
        points=config.points,
        gamma_max=config.gamma_max,
        stream=SeededStream(config.seed, config.stream_id),
    )
    text = render_json(record) if config.format == OutputFormat.JSON else trajectory_csv(record)
    emit(text, config.out)
    write_sidecar(COMMAND, config, config.out)
