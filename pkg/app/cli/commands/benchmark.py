"""benchmark - 몬테카를로 실험 (MISE 표, gamma 평균, 곡선 데이터)"""

import argparse
import logging
from typing import Any

from app.cli.arguments import add_common_arguments, add_grid_arguments, common_overrides, grid_overrides
from app.core.errors import ConfigError
from app.schemas.experiment import BenchmarkMethod, MiseReport
from app.schemas.run_config import BenchmarkConfig, ExperimentKind, OutputFormat
from app.services.densities import density_by_name
from app.services.experiments import (
    CurveSet,
    candidate_curves,
    estimator_beams,
    gamma_mean_experiment,
    mise_protocol,
)
from app.services.kernels import kernel_by_name
from app.utils.config_loader import write_sidecar
from app.utils.writers import curves_csv, emit, gamma_mean_csv, mise_csv, render_json

logger = logging.getLogger(__name__)

COMMAND = "benchmark"


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser(COMMAND, help="Monte-Carlo MISE tables and figure data")
    add_common_arguments(parser, kernel=False)
    add_grid_arguments(parser)
    parser.add_argument(
        "--experiment", choices=[e.value for e in ExperimentKind], help="default: mise"
    )
    parser.add_argument("--density", dest="densities", nargs="+")
    parser.add_argument("--kernel", dest="kernels", nargs="+")
    parser.add_argument(
        "--method", dest="methods", nargs="+",
        choices=[m.value for m in BenchmarkMethod if m != BenchmarkMethod.WW_FROZEN],
    )
    parser.add_argument("--n", nargs="+", type=int)
    parser.add_argument("--reps", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--workers", type=int)
    parser.set_defaults(command=COMMAND, handler=run, overrides=overrides)


def overrides(args: argparse.Namespace) -> dict[str, Any]:
    return {
        **common_overrides(args),
        **grid_overrides(args),
        "experiment": args.experiment,
        "densities": args.densities,
        "kernels": args.kernels,
        "methods": args.methods,
        "n": args.n,
        "reps": args.reps,
        "seed": args.seed,
        "workers": args.workers,
    }


def run_mise(config: BenchmarkConfig) -> list[MiseReport]:
    reports: list[MiseReport] = []
    for density_name in config.densities:
        density = density_by_name(density_name)
        for n in config.n:
            for method in config.methods:
                for kernel_name in config.kernels:
                    reports.append(
                        mise_protocol(
                            density,
                            method,
                            kernel_by_name(kernel_name),
                            n,
                            config.reps,
                            grid=config.grid,
                            seed=config.seed,
                            workers=config.workers,
                        )
                    )
    return reports


def _single(values: list[Any], label: str) -> Any:
    if len(values) != 1:
        raise ConfigError(f"curve experiments take exactly one {label}, got {values}")
    return values[0]


def run_curves(config: BenchmarkConfig) -> CurveSet:
    density = density_by_name(_single(config.densities, "density"))
    kernel = kernel_by_name(_single(config.kernels, "kernel"))
    n = _single(config.n, "n")
    if config.experiment == ExperimentKind.CURVES:
        return candidate_curves(density, kernel, n, config.grid, config.seed)
    method = _single(config.methods, "method")
    return estimator_beams(
        density, kernel, method, n, config.reps, config.grid, config.seed, config.workers
    )


def run(config: BenchmarkConfig) -> None:
    logger.info("Benchmark %s started", config.experiment.value)
    as_json = config.format == OutputFormat.JSON

    if config.experiment == ExperimentKind.MISE:
        reports = run_mise(config)
        text = (
            render_json({"reports": [r.model_dump(mode="json") for r in reports]})
            if as_json
            else mise_csv(reports)
        )
    elif config.experiment == ExperimentKind.GAMMA_MEAN:
        tables = [
            gamma_mean_experiment(
                density_by_name(d), kernel_by_name(k), config.n, config.reps,
                config.grid, config.seed, config.workers,
            )
            for d in config.densities
            for k in config.kernels
        ]
        text = (
            render_json({"tables": [t.model_dump(mode="json") for t in tables]})
            if as_json
            else gamma_mean_csv(tables)
        )
    else:
        curves = run_curves(config)
        text = (
            render_json(
                {
                    "x": curves.points.tolist(),
                    "truth": curves.truth.tolist(),
                    "curves": dict(zip(curves.labels, curves.curves.tolist())),
                }
            )
            if as_json
            else curves_csv(curves.points, curves.labels, curves.curves, curves.truth)
        )

    path = emit(text, config.out)
    write_sidecar(COMMAND, config, config.out)
    if path is not None:
        logger.info("Benchmark report written to %s", path)
