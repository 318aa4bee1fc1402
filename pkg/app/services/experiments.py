"""Experiment service: 몬테카를로 MISE 실험, 동결 gamma 비교, 온라인 재선택.

반복 r 은 항상 ``SeededStream(seed, r)`` 에서 표본을 뽑으므로 직렬/병렬 실행 결과가
비트 단위로 같습니다. 한 반복의 ISE 는

    ((b - a) / P) * sum_l (f_hat(x_l) - f(x_l))**2,   x_l = a + l (b - a) / P

이고 ``[a, b]`` 는 관측된 표본 범위, ``l = 1..P`` 입니다.
"""

from __future__ import annotations

import asyncio
import logging
import math
from dataclasses import dataclass
from typing import Callable, Sequence, TypeVar

import numpy as np

from app.core.config import settings
from app.core.errors import InvalidArgumentError
from app.schemas.experiment import (
    BenchmarkMethod,
    GammaMeanRow,
    GammaMeanTable,
    GridParams,
    MiseReport,
    TrajectoryRecord,
)
from app.services.bandwidths import (
    BandwidthSchedule,
    GammaGrid,
    GridKind,
    estimate_beta,
    make_grid,
)
from app.services.densities import (
    DensityModel,
    SeededStream,
    density_eval,
    density_sample,
)
from app.services.estimator import EstimatorMatrix, EvaluationGrid, Sample, ww_evaluate
from app.services.kernels import GaussianMixtureKernel
from app.services.selection import (
    estimate_rows,
    gl_select,
    lmr_select,
    lmr_select_matrix,
    selection_grid,
)

logger = logging.getLogger(__name__)

T = TypeVar("T")
EstimatorOverride = Callable[[Sample, np.ndarray], np.ndarray]


def default_grid_params() -> GridParams:
    return GridParams(
        size=settings.GRID_SIZE,
        gamma_max=settings.GAMMA_MAX,
        upsilon=settings.UPSILON,
        selection_points=settings.SELECTION_POINTS,
        extension_sd=settings.EXTENSION_SD,
        eval_points=settings.EVAL_POINTS,
    )


# ===========================================
# Replication runner
# ===========================================


async def run_replications_async(
    task: Callable[[int], T], replications: int, workers: int = 1
) -> list[T]:
    """Run ``task(r)`` for every r in worker threads; results in index order."""
    semaphore = asyncio.Semaphore(max(1, workers))

    async def one(index: int) -> T:
        async with semaphore:
            return await asyncio.to_thread(task, index)

    return list(await asyncio.gather(*(one(r) for r in range(replications))))


def run_replications(task: Callable[[int], T], replications: int, workers: int = 1) -> list[T]:
    if workers <= 1:
        return [task(r) for r in range(replications)]
    return asyncio.run(run_replications_async(task, replications, workers))


# ===========================================
# ISE helpers
# ===========================================


def ise_points(a: float, b: float, points: int) -> np.ndarray:
    """``x_l = a + l (b - a) / P`` for ``l = 1..P``."""
    return a + np.arange(1, points + 1) * (b - a) / points


def integrated_squared_error(
    estimate: np.ndarray, truth: np.ndarray, a: float, b: float
) -> float:
    diff = np.asarray(estimate, dtype=float) - np.asarray(truth, dtype=float)
    return float((b - a) / diff.size * np.dot(diff, diff))


def _ise_grid(sample: Sample, points: int) -> tuple[float, float, np.ndarray]:
    a, b = sample.range
    if not b > a:
        raise InvalidArgumentError("sample range is degenerate; need n >= 2 distinct draws")
    return a, b, ise_points(a, b, points)


def _summarize(
    density: DensityModel,
    method: BenchmarkMethod,
    kernel: GaussianMixtureKernel,
    n: int,
    outcomes: Sequence[tuple[float, float]],
) -> MiseReport:
    ises = np.array([ise for ise, _ in outcomes])
    return MiseReport(
        density=density.name,
        method=method,
        kernel_order=kernel.order or 0,
        n=n,
        replications=len(outcomes),
        mise_times_100=100.0 * float(np.mean(ises)),
        std_times_100=100.0 * float(np.std(ises, ddof=1)),
        per_replication=[float(v) for v in ises],
        selected=[float(s) for _, s in outcomes],
    )


# ===========================================
# Estimation methods
# ===========================================


@dataclass(frozen=True, slots=True)
class FittedEstimate:
    parameter: float
    schedule: BandwidthSchedule


METHOD_GRID_KINDS: dict[BenchmarkMethod, tuple[GridKind, ...]] = {
    BenchmarkMethod.WW_LMR: (GridKind.EQUISPACED_LMR, GridKind.SQRT_LOG_GL),
    BenchmarkMethod.WW_GL: (GridKind.EQUISPACED_LMR, GridKind.SQRT_LOG_GL),
    BenchmarkMethod.LMR_FIXED: (GridKind.FIXED_H_LMR,),
}


def grid_kind_for(method: BenchmarkMethod | str, kind: GridKind | str | None = None) -> GridKind:
    """방법에 맞는 후보 격자 종류를 정합니다.

    Args:
        method: 벤치마크 방법 (ww_frozen 은 ww_lmr 과 같은 격자)
        kind: 설정의 ``grid.kind``; None 이면 방법별 기본값

    Raises:
        InvalidArgumentError: 방법과 맞지 않는 격자 종류
    """
    method = BenchmarkMethod(method)
    if method == BenchmarkMethod.WW_FROZEN:
        method = BenchmarkMethod.WW_LMR
    if kind is None:
        kind = {
            BenchmarkMethod.WW_LMR: settings.GRID_KIND,
            BenchmarkMethod.WW_GL: GridKind.SQRT_LOG_GL,
            BenchmarkMethod.LMR_FIXED: GridKind.FIXED_H_LMR,
        }[method]
    try:
        kind = GridKind(kind)
    except ValueError as exc:
        raise InvalidArgumentError(f"unknown grid kind {kind!r}") from exc
    if kind not in METHOD_GRID_KINDS[method]:
        raise InvalidArgumentError(f"{method.value} cannot run on a {kind.value} grid")
    return kind


def candidate_grid(
    method: BenchmarkMethod | str, grid: GridParams, n: int
) -> GammaGrid:
    kind = grid_kind_for(method, grid.kind)
    gamma_max = grid.h_max if kind == GridKind.FIXED_H_LMR else grid.gamma_max
    return make_grid(kind, n=n, size=grid.size, gamma_max=gamma_max)


def fit(
    sample: Sample,
    kernel: GaussianMixtureKernel,
    method: BenchmarkMethod | str,
    grid: GridParams,
) -> FittedEstimate:
    """샘플에 대해 방법별로 대역폭 파라미터를 선택합니다.

    Args:
        sample: 관측값
        kernel: 커널
        method: ww_lmr, lmr_fixed, ww_gl
        grid: 후보 격자/선택 격자 설정

    Returns:
        선택된 파라미터와 그 스케줄

    Raises:
        InvalidArgumentError: ww_frozen (frozen_gamma_protocol 전용) 이거나 격자 종류가 맞지 않는 경우
    """
    method = BenchmarkMethod(method)
    if method == BenchmarkMethod.WW_FROZEN:
        raise InvalidArgumentError("ww_frozen runs through frozen_gamma_protocol")
    candidates = candidate_grid(method, grid, len(sample))
    eval_grid = selection_grid(sample, kernel, grid.selection_points, grid.extension_sd)
    if method == BenchmarkMethod.WW_GL:
        chosen = gl_select(sample, kernel, candidates, grid.upsilon, eval_grid).chosen_gamma
    else:
        chosen = lmr_select(sample, kernel, candidates, eval_grid).chosen_gamma
    if candidates.is_fixed_h:
        return FittedEstimate(chosen, BandwidthSchedule.constant(chosen))
    return FittedEstimate(chosen, BandwidthSchedule.power_law(chosen))


# ===========================================
# Protocols
# ===========================================


def mise_protocol(
    density: DensityModel,
    method: BenchmarkMethod | str,
    kernel: GaussianMixtureKernel,
    n: int,
    replications: int,
    grid: GridParams | None = None,
    seed: int | None = None,
    workers: int = 1,
    estimator_override: EstimatorOverride | None = None,
) -> MiseReport:
    """(density, method, kernel, n) 셀 하나의 100 x MISE 계산

    Args:
        density: 참 밀도
        method: 추정 방법
        kernel: 커널
        n: 표본 크기
        replications: 반복 수 (>= 2)
        grid: 후보/평가 격자 설정 (없으면 settings 기본값)
        seed: 루트 시드 (없으면 settings.SEED)
        workers: 동시 실행 스레드 수
        estimator_override: 방법 대신 쓸 추정기 (비교 실험용)

    Returns:
        MiseReport

    Raises:
        InvalidArgumentError: replications < 2 또는 n < 2
    """
    if replications < 2:
        raise InvalidArgumentError(f"need at least 2 replications, got {replications}")
    if n < 2:
        raise InvalidArgumentError(f"need n >= 2, got {n}")
    method = BenchmarkMethod(method)
    grid = grid or default_grid_params()
    seed = settings.SEED if seed is None else seed

    def replicate(r: int) -> tuple[float, float]:
        sample = density_sample(density, SeededStream(seed, r), n)
        a, b, xs = _ise_grid(sample, grid.eval_points)
        if estimator_override is not None:
            values, parameter = estimator_override(sample, xs), float("nan")
        else:
            fitted = fit(sample, kernel, method, grid)
            values = ww_evaluate(sample, kernel, fitted.schedule, xs)
            parameter = fitted.parameter
        return integrated_squared_error(values, density_eval(density, xs), a, b), parameter

    logger.info(
        "MISE cell density=%s method=%s kernel=%s n=%s R=%s",
        density.name, method.value, kernel.name, n, replications,
    )
    outcomes = run_replications(replicate, replications, workers)
    report = _summarize(density, method, kernel, n, outcomes)
    logger.info("100 x MISE = %.4f (std %.4f)", report.mise_times_100, report.std_times_100)
    return report


def frozen_gamma_protocol(
    density: DensityModel,
    kernel: GaussianMixtureKernel,
    n0: int,
    n1: int,
    replications: int,
    grid: GridParams | None = None,
    seed: int | None = None,
    workers: int = 1,
) -> tuple[MiseReport, MiseReport]:
    """처음 ``n0`` 개로 gamma 를 고른 뒤, 그 gamma 를 고정한 채 재귀 갱신을 이어갑니다.

    두 번째 단계는 다시 추정하지 않고 첫 단계 상태에서 ``n0+1 .. n0+n1`` 번째
    관측치를 흡수합니다.

    Returns:
        (첫 단계 MiseReport, 동결 단계 MiseReport)

    Raises:
        InvalidArgumentError: n0 < 2, n1 < 0 또는 replications < 2
    """
    if n0 < 2 or n1 < 0:
        raise InvalidArgumentError(f"need n0 >= 2 and n1 >= 0, got n0={n0}, n1={n1}")
    if replications < 2:
        raise InvalidArgumentError(f"need at least 2 replications, got {replications}")
    grid = grid or default_grid_params()
    seed = settings.SEED if seed is None else seed

    def replicate(r: int) -> tuple[tuple[float, float], tuple[float, float]]:
        sample = density_sample(density, SeededStream(seed, r), n0 + n1)
        first = sample.head(n0)
        gamma = fit(first, kernel, BenchmarkMethod.WW_LMR, grid).parameter
        frozen = GammaGrid(values=(gamma,))

        a0, b0, xs0 = _ise_grid(first, grid.eval_points)
        phase1 = EstimatorMatrix.from_sample(first, frozen, EvaluationGrid(xs0), kernel)
        ise0 = integrated_squared_error(phase1.row(0), density_eval(density, xs0), a0, b0)

        a1, b1, xs1 = _ise_grid(sample, grid.eval_points)
        phase2 = EstimatorMatrix.from_sample(first, frozen, EvaluationGrid(xs1), kernel)
        phase2.absorb(sample.observations[n0:])
        ise1 = integrated_squared_error(phase2.row(0), density_eval(density, xs1), a1, b1)
        return (ise0, gamma), (ise1, gamma)

    logger.info(
        "Frozen-gamma protocol density=%s kernel=%s n0=%s n1=%s R=%s",
        density.name, kernel.name, n0, n1, replications,
    )
    outcomes = run_replications(replicate, replications, workers)
    before = _summarize(density, BenchmarkMethod.WW_LMR, kernel, n0, [o[0] for o in outcomes])
    after = _summarize(density, BenchmarkMethod.WW_FROZEN, kernel, n0 + n1, [o[1] for o in outcomes])
    return before, after


class OnlineSelector:
    """Keeps the estimate matrix and re-selects gamma after every observation.

    The evaluation grid is fixed from the first ``warmup`` observations
    (their range extended by a few kernel standard deviations); the matrix is
    never rebuilt afterwards.
    """

    def __init__(
        self,
        kernel: GaussianMixtureKernel,
        gamma_grid: GammaGrid,
        points: int,
        warmup: int = 1,
        extension_sd: float | None = None,
    ) -> None:
        if warmup < 1:
            raise InvalidArgumentError(f"warmup must be >= 1, got {warmup}")
        self.kernel = kernel
        self.gamma_grid = gamma_grid
        self.points = points
        self.warmup = warmup
        self.extension_sd = settings.EXTENSION_SD if extension_sd is None else extension_sd
        self.state: EstimatorMatrix | None = None
        self._pending: list[float] = []

    @property
    def n(self) -> int:
        return self.state.n if self.state is not None else len(self._pending)

    def _start(self) -> EstimatorMatrix:
        a, b = Sample.of(self._pending).range
        eval_grid = EvaluationGrid.extended(a, b, self.kernel, self.points, self.extension_sd)
        state = EstimatorMatrix(gamma_grid=self.gamma_grid, eval_grid=eval_grid, kernel=self.kernel)
        state.absorb(self._pending)
        self._pending = []
        return state

    def push(self, x: float) -> float | None:
        """Absorb ``x``; return the newly selected gamma once warmed up."""
        x = float(x)
        if not math.isfinite(x):
            raise InvalidArgumentError(f"observation must be finite, got {x}")
        if self.state is None:
            self._pending.append(x)
            if len(self._pending) < self.warmup:
                return None
            self.state = self._start()
        else:
            self.state.update(x)
        return lmr_select_matrix(self.state).chosen_gamma

    def finish(self) -> float | None:
        """Force the grid from a short input; None if nothing was absorbed."""
        if self.state is None:
            if not self._pending:
                return None
            self.state = self._start()
            return lmr_select_matrix(self.state).chosen_gamma
        return None


def online_selection_protocol(
    density: DensityModel,
    kernel: GaussianMixtureKernel,
    n_start: int,
    n_end: int,
    grid_size: int | None = None,
    points: int | None = None,
    gamma_max: float | None = None,
    stream: SeededStream | None = None,
) -> TrajectoryRecord:
    """``n_start..n_end`` 구간에서 매 갱신 후 다시 고른 gamma 궤적

    Args:
        density: 참 밀도
        kernel: 커널
        n_start: 평가 격자를 고정하는 워밍업 크기
        n_end: 마지막 표본 크기
        grid_size: 후보 격자 크기 (없으면 settings.ONLINE_GRID_SIZE)
        points: 평가 지점 수 (없으면 settings.ONLINE_POINTS)
        gamma_max: 최대 gamma (없으면 settings.GAMMA_MAX)
        stream: 난수 스트림 (없으면 settings.SEED)

    Returns:
        TrajectoryRecord (gamma 는 n_end - n_start + 1 개)

    Raises:
        InvalidArgumentError: n_start < 1 또는 n_end < n_start
    """
    if n_start < 1 or n_end < n_start:
        raise InvalidArgumentError(f"need 1 <= n_start <= n_end, got {n_start}, {n_end}")
    stream = stream or SeededStream(settings.SEED)
    candidates = make_grid(
        GridKind.EQUISPACED_LMR,
        size=settings.ONLINE_GRID_SIZE if grid_size is None else grid_size,
        gamma_max=settings.GAMMA_MAX if gamma_max is None else gamma_max,
    )
    selector = OnlineSelector(
        kernel,
        candidates,
        settings.ONLINE_POINTS if points is None else points,
        warmup=n_start,
    )
    sample = density_sample(density, stream, n_end)
    gammas = [g for g in map(selector.push, sample.observations) if g is not None]
    assert selector.state is not None
    return TrajectoryRecord(
        density=density.name,
        kernel=kernel.name,
        n_start=n_start,
        n_end=n_end,
        seed=stream.seed,
        stream_id=stream.stream_id,
        gammas=gammas,
        grid=list(candidates.values),
        kernel_evaluations=selector.state.kernel_evaluations,
    )


def gamma_mean_experiment(
    density: DensityModel,
    kernel: GaussianMixtureKernel,
    n_values: Sequence[int],
    replications: int,
    grid: GridParams | None = None,
    seed: int | None = None,
    workers: int = 1,
) -> GammaMeanTable:
    """표본 크기별 LMR 선택 gamma 의 평균과 표준편차

    Returns:
        GammaMeanTable (행마다 평균 gamma 에서 읽은 beta 추정치 포함)

    Raises:
        InvalidArgumentError: replications < 2
    """
    if replications < 2:
        raise InvalidArgumentError(f"need at least 2 replications, got {replications}")
    grid = grid or default_grid_params()
    seed = settings.SEED if seed is None else seed
    rows: list[GammaMeanRow] = []
    for n in n_values:
        def replicate(r: int, n: int = n) -> float:
            sample = density_sample(density, SeededStream(seed, r), n)
            return fit(sample, kernel, BenchmarkMethod.WW_LMR, grid).parameter

        gammas = np.array(run_replications(replicate, replications, workers))
        rows.append(
            GammaMeanRow(
                n=n,
                mean_gamma=float(gammas.mean()),
                std_gamma=float(gammas.std(ddof=1)),
                mean_beta_hat=estimate_beta(float(gammas.mean())),
                per_replication=[float(g) for g in gammas],
            )
        )
        logger.info("n=%s mean gamma=%.4f", n, rows[-1].mean_gamma)
    return GammaMeanTable(
        density=density.name, kernel=kernel.name, replications=replications, rows=rows, seed=seed
    )


# ===========================================
# Curve data for figures (CSV only, no plotting)
# ===========================================


@dataclass(frozen=True, slots=True)
class CurveSet:
    points: np.ndarray
    labels: list[str]
    curves: np.ndarray
    truth: np.ndarray


def candidate_curves(
    density: DensityModel,
    kernel: GaussianMixtureKernel,
    n: int,
    grid: GridParams | None = None,
    seed: int | None = None,
) -> CurveSet:
    """All WW and fixed-h proposals for one sample path, on its ISE grid."""
    grid = grid or default_grid_params()
    seed = settings.SEED if seed is None else seed
    sample = density_sample(density, SeededStream(seed, 0), n)
    _, _, xs = _ise_grid(sample, grid.eval_points)
    eval_grid = EvaluationGrid(xs)
    ww_grid = make_grid(GridKind.EQUISPACED_LMR, size=grid.size, gamma_max=grid.gamma_max)
    h_grid = make_grid(GridKind.FIXED_H_LMR, size=grid.size, gamma_max=grid.h_max)
    curves = np.vstack(
        [estimate_rows(sample, kernel, ww_grid, eval_grid),
         estimate_rows(sample, kernel, h_grid, eval_grid)]
    )
    labels = [f"gamma={g!r}" for g in ww_grid] + [f"h={h!r}" for h in h_grid]
    return CurveSet(xs, labels, curves, density_eval(density, xs))


def estimator_beams(
    density: DensityModel,
    kernel: GaussianMixtureKernel,
    method: BenchmarkMethod | str,
    n: int,
    count: int,
    grid: GridParams | None = None,
    seed: int | None = None,
    workers: int = 1,
) -> CurveSet:
    """Final estimates of ``count`` paths on one common grid."""
    grid = grid or default_grid_params()
    seed = settings.SEED if seed is None else seed
    laws = [c.law() for c in density.components]
    a = min(float(law.ppf(0.001)) for law in laws)
    b = max(float(law.ppf(0.999)) for law in laws)
    xs = np.linspace(a, b, grid.eval_points)

    def replicate(r: int) -> np.ndarray:
        sample = density_sample(density, SeededStream(seed, r), n)
        fitted = fit(sample, kernel, method, grid)
        return ww_evaluate(sample, kernel, fitted.schedule, xs)

    curves = np.vstack(run_replications(replicate, count, workers))
    return CurveSet(xs, [f"path={r}" for r in range(count)], curves, density_eval(density, xs))
