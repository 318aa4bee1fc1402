"""stream - 표준 입력의 관측값을 하나씩 흡수하며 gamma 재선택

워밍업 이후 관측값마다 한 줄 ``n,gamma`` 를 출력합니다. 처음 ``warmup - 1`` 개는
평가 격자를 고정하는 데만 쓰이고 출력 줄이 없습니다. 입력이 끝나면 최종 행렬 스냅샷을
``--snapshot-out`` 에 기록합니다. ``--snapshot-every N`` 은 N 개마다 중간 스냅샷을
``<stem>_n<N><suffix>`` 로 남깁니다.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, TextIO

from app.cli.arguments import add_common_arguments, common_overrides
from app.core.errors import ConfigError
from app.schemas.run_config import OutputFormat, StreamConfig
from app.services.bandwidths import GridKind, make_grid
from app.services.experiments import OnlineSelector
from app.services.kernels import kernel_by_name
from app.utils.config_loader import write_sidecar
from app.utils.sample_io import iter_observations, open_input
from app.utils.writers import emit, format_number, matrix_snapshot_csv

logger = logging.getLogger(__name__)

COMMAND = "stream"


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser(
        COMMAND,
        help="consume observations and re-select gamma online",
        description=(
            "Prints one \"n,gamma\" line per observation once the warm-up is complete. "
            "The first warmup-1 observations only fix the evaluation grid and print "
            "nothing; if the input ends earlier, a single line is printed for the "
            "observations seen."
        ),
    )
    add_common_arguments(parser)
    parser.add_argument("input", nargs="?", help="observation file (default: stdin)")
    parser.add_argument("--grid-size", dest="grid_size", type=int)
    parser.add_argument("--gamma-max", dest="gamma_max", type=float)
    parser.add_argument("--points", type=int)
    parser.add_argument(
        "--warmup", type=int,
        help="observations buffered to fix the grid; no output line before the warmup-th",
    )
    parser.add_argument("--snapshot-every", dest="snapshot_every", type=int)
    parser.add_argument("--snapshot-out", dest="snapshot_out")
    parser.set_defaults(command=COMMAND, handler=run, overrides=overrides)


def overrides(args: argparse.Namespace) -> dict[str, Any]:
    return {
        **common_overrides(args),
        "input": args.input,
        "grid_size": args.grid_size,
        "gamma_max": args.gamma_max,
        "points": args.points,
        "warmup": args.warmup,
        "snapshot_every": args.snapshot_every,
        "snapshot_out": args.snapshot_out,
    }


def periodic_snapshot_path(final: str | Path, n: int) -> Path:
    final = Path(final)
    return final.with_name(f"{final.stem}_n{n}{final.suffix}")


class _LineWriter:
    def __init__(self, handle: TextIO, fmt: OutputFormat) -> None:
        self.handle = handle
        self.fmt = fmt
        if fmt == OutputFormat.CSV:
            handle.write("n,gamma\n")

    def write(self, n: int, gamma: float) -> None:
        if self.fmt == OutputFormat.JSON:
            self.handle.write(json.dumps({"n": n, "gamma": gamma}) + "\n")
        else:
            self.handle.write(f"{format_number(n)},{format_number(gamma)}\n")
        self.handle.flush()


def run(config: StreamConfig) -> None:
    if config.snapshot_every and config.snapshot_out is None:
        raise ConfigError("--snapshot-every needs --snapshot-out")
    selector = OnlineSelector(
        kernel_by_name(config.kernel),
        make_grid(GridKind.EQUISPACED_LMR, size=config.grid_size, gamma_max=config.gamma_max),
        config.points,
        warmup=config.warmup,
        extension_sd=config.extension_sd,
    )

    to_stdout = config.out is None or config.out == "-"
    if not to_stdout:
        Path(config.out).parent.mkdir(parents=True, exist_ok=True)
    out = sys.stdout if to_stdout else open(config.out, "w", encoding="utf-8")
    source = open_input(config.input)
    try:
        lines = _LineWriter(out, config.format)
        for x in iter_observations(source):
            gamma = selector.push(x)
            if gamma is None:
                continue
            lines.write(selector.n, gamma)
            if config.snapshot_every and selector.n % config.snapshot_every == 0:
                emit(
                    matrix_snapshot_csv(selector.state.snapshot()),
                    periodic_snapshot_path(config.snapshot_out, selector.n),
                )
        gamma = selector.finish()
        if gamma is not None:
            lines.write(selector.n, gamma)
    finally:
        if source is not sys.stdin:
            source.close()
        if out is not sys.stdout:
            out.close()

    if selector.state is None:
        logger.info("No observations received; nothing to snapshot")
    elif config.snapshot_out is not None:
        emit(matrix_snapshot_csv(selector.state), config.snapshot_out)
        logger.info("Final snapshot (n=%s) written to %s", selector.n, config.snapshot_out)
    write_sidecar(COMMAND, config, config.out)
