"""frozen - gamma 를 n0 개로 고르고 고정한 채 n1 개를 더 흡수"""

import argparse
from typing import Any

from app.cli.arguments import add_common_arguments, add_grid_arguments, common_overrides, grid_overrides
from app.schemas.run_config import FrozenConfig, OutputFormat
from app.services.densities import density_by_name
from app.services.experiments import frozen_gamma_protocol
from app.services.kernels import kernel_by_name
from app.utils.config_loader import write_sidecar
from app.utils.writers import emit, mise_csv, render_json

COMMAND = "frozen"


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser(COMMAND, help="MISE before/after freezing the selected gamma")
    add_common_arguments(parser)
    add_grid_arguments(parser)
    parser.add_argument("--density")
    parser.add_argument("--n0", type=int)
    parser.add_argument("--n1", type=int)
    parser.add_argument("--reps", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--workers", type=int)
    parser.set_defaults(command=COMMAND, handler=run, overrides=overrides)


def overrides(args: argparse.Namespace) -> dict[str, Any]:
    return {
        **common_overrides(args),
        **grid_overrides(args),
        "density": args.density,
        "n0": args.n0,
        "n1": args.n1,
        "reps": args.reps,
        "seed": args.seed,
        "workers": args.workers,
    }


def run(config: FrozenConfig) -> None:
    before, after = frozen_gamma_protocol(
        density_by_name(config.density),
        kernel_by_name(config.kernel),
        config.n0,
        config.n1,
        config.reps,
        grid=config.grid,
        seed=config.seed,
        workers=config.workers,
    )
    if config.format == OutputFormat.JSON:
        text = render_json({"before": before.model_dump(mode="json"), "after": after.model_dump(mode="json")})
    else:
        text = mise_csv([before, after])
    emit(text, config.out)
    write_sidecar(COMMAND, config, config.out)
