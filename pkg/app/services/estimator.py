"""Estimator service: Wolverton-Wagner 재귀 커널 밀도 추정기.

    f_n(x) = (1/n) sum_k (1/h_k) K((X_k - x) / h_k)

모든 추정치는 관측치마다 커널 성분 블록을 갖는 부호 있는 가우시안 혼합이라
정확한 평가와 정확한 L2 거리를 계산할 수 있습니다. ``EstimatorMatrix`` 는
고정 격자 위 M x K 추정치 표를 들고 관측치 하나씩 다음 재귀로 갱신합니다:

    f_{n+1} = n/(n+1) f_n + 1/((n+1) h_{n+1}) K((X_{n+1} - x) / h_{n+1}).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from app.core.errors import InvalidArgumentError
from app.services.bandwidths import BandwidthSchedule, GammaGrid
from app.services.kernels import GaussianMixtureKernel, gaussian_density

logger = logging.getLogger(__name__)

EQUISPACING_RTOL = 1e-12
# observations evaluated per block, bounds the (block x points) temporaries
_CHUNK = 2048


@dataclass(frozen=True, slots=True, eq=False)
class Sample:
    """Observations in arrival order; position k sets the bandwidth h_k."""

    observations: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.observations, dtype=float).ravel()
        if not np.all(np.isfinite(values)):
            raise InvalidArgumentError("sample contains non-finite observations")
        values.setflags(write=False)
        object.__setattr__(self, "observations", values)

    @classmethod
    def of(cls, values: Iterable[float]) -> "Sample":
        return cls(np.fromiter((float(v) for v in values), dtype=float))

    def __len__(self) -> int:
        return int(self.observations.size)

    def head(self, n: int) -> "Sample":
        return Sample(self.observations[:n])

    @property
    def range(self) -> tuple[float, float]:
        if len(self) == 0:
            raise InvalidArgumentError("empty sample has no range")
        return float(self.observations.min()), float(self.observations.max())


@dataclass(frozen=True, slots=True, eq=False)
class EvaluationGrid:
    """Equispaced evaluation points ``a = x_1 < ... < x_K = b``."""

    points: np.ndarray

    def __post_init__(self) -> None:
        points = np.asarray(self.points, dtype=float).ravel()
        if points.size < 2:
            raise InvalidArgumentError("evaluation grid needs at least 2 points")
        gaps = np.diff(points)
        if np.any(gaps <= 0):
            raise InvalidArgumentError("evaluation grid must be strictly increasing")
        spacing = (points[-1] - points[0]) / (points.size - 1)
        scale = max(points[-1] - points[0], float(np.max(np.abs(points))))
        if np.max(np.abs(gaps - spacing)) > EQUISPACING_RTOL * scale:
            raise InvalidArgumentError("evaluation grid must be equispaced")
        points.setflags(write=False)
        object.__setattr__(self, "points", points)

    @classmethod
    def linspace(cls, a: float, b: float, size: int) -> "EvaluationGrid":
        if not b > a:
            raise InvalidArgumentError(f"grid range must satisfy a < b, got [{a}, {b}]")
        return cls(np.linspace(a, b, size))

    @classmethod
    def extended(
        cls,
        a: float,
        b: float,
        kernel: GaussianMixtureKernel,
        size: int,
        extension_sd: float = 3.0,
    ) -> "EvaluationGrid":
        """``[a, b]`` widened by ``extension_sd`` kernel standard deviations."""
        margin = extension_sd * kernel.max_sd
        if b <= a and margin == 0.0:
            margin = 1.0
        return cls.linspace(a - margin, b + margin, size)

    def __len__(self) -> int:
        return int(self.points.size)

    @property
    def spacing(self) -> float:
        return float((self.points[-1] - self.points[0]) / (self.points.size - 1))

    @property
    def range(self) -> tuple[float, float]:
        return float(self.points[0]), float(self.points[-1])


def _as_points(xs: EvaluationGrid | Sequence[float] | np.ndarray) -> np.ndarray:
    if isinstance(xs, EvaluationGrid):
        return xs.points
    return np.asarray(xs, dtype=float).ravel()


def _require_sample(sample: Sample) -> None:
    if len(sample) == 0:
        raise InvalidArgumentError("sample must contain at least one observation")


@dataclass(frozen=True, slots=True, eq=False)
class MixtureEstimate:
    """Estimate ``(1/n) sum_k sum_j w_kj phi_{v_kj}(X_k - x)``.

    ``weights`` and ``variances`` have shape ``(n, J)``: row k holds the
    kernel used for observation k.
    """

    centers: np.ndarray
    weights: np.ndarray
    variances: np.ndarray

    @classmethod
    def ww(
        cls, sample: Sample, kernel: GaussianMixtureKernel, schedule: BandwidthSchedule
    ) -> "MixtureEstimate":
        _require_sample(sample)
        h_sq = schedule.bandwidths(len(sample)) ** 2
        n = len(sample)
        weights = np.broadcast_to(kernel.weights, (n, kernel.weights.size))
        variances = h_sq[:, None] * kernel.variances[None, :]
        return cls(sample.observations, np.array(weights), variances)

    @classmethod
    def convolved(
        cls,
        sample: Sample,
        kernel: GaussianMixtureKernel,
        schedule: BandwidthSchedule,
        inner_schedule: BandwidthSchedule,
    ) -> "MixtureEstimate":
        """``(1/n) sum_k (K_{h_k(inner)} * K_{h_k(outer)})(X_k - x)``."""
        _require_sample(sample)
        n = len(sample)
        h_sq = schedule.bandwidths(n) ** 2
        g_sq = inner_schedule.bandwidths(n) ** 2
        w = kernel.weights
        v = kernel.variances
        pair_weights = np.outer(w, w).ravel()
        # (n, J*J): v_i g_k^2 + v_j h_k^2
        variances = (
            g_sq[:, None, None] * v[None, :, None] + h_sq[:, None, None] * v[None, None, :]
        ).reshape(n, -1)
        weights = np.broadcast_to(pair_weights, variances.shape)
        return cls(sample.observations, np.array(weights), variances)

    @property
    def n(self) -> int:
        return int(self.centers.size)

    def evaluate(self, xs: EvaluationGrid | Sequence[float] | np.ndarray) -> np.ndarray:
        points = _as_points(xs)
        out = np.zeros(points.size)
        for start in range(0, self.n, _CHUNK):
            stop = start + _CHUNK
            diff = self.centers[start:stop, None] - points[None, :]
            block_w = self.weights[start:stop]
            block_v = self.variances[start:stop]
            for j in range(block_w.shape[1]):
                out += np.sum(
                    block_w[:, j, None] * gaussian_density(diff, block_v[:, j, None]),
                    axis=0,
                )
        return out / self.n


def ww_evaluate(
    sample: Sample,
    kernel: GaussianMixtureKernel,
    schedule: BandwidthSchedule,
    xs: EvaluationGrid | Sequence[float] | np.ndarray,
) -> np.ndarray:
    """``xs`` 에서의 WW 추정치 일괄 계산

    Args:
        sample: 도착 순서의 관측치
        kernel: 커널
        schedule: 대역폭 스케줄 (상수 스케줄이면 Parzen-Rosenblatt)
        xs: 평가 지점

    Returns:
        xs 와 같은 길이의 추정치 배열

    Raises:
        InvalidArgumentError: 빈 표본
    """
    return MixtureEstimate.ww(sample, kernel, schedule).evaluate(xs)


def gl_convolved_evaluate(
    sample: Sample,
    kernel: GaussianMixtureKernel,
    gamma: float,
    gamma_prime: float,
    xs: EvaluationGrid | Sequence[float] | np.ndarray,
) -> np.ndarray:
    return MixtureEstimate.convolved(
        sample,
        kernel,
        BandwidthSchedule.power_law(gamma),
        BandwidthSchedule.power_law(gamma_prime),
    ).evaluate(xs)


class L2Method(str, Enum):
    GRID = "grid"
    EXACT = "exact"


def _exact_l2_sq(fa: MixtureEstimate, fb: MixtureEstimate) -> float:
    # signed mixture fa - fb, then the full pairwise expansion
    centers = np.concatenate([np.repeat(fa.centers, fa.weights.shape[1]),
                              np.repeat(fb.centers, fb.weights.shape[1])])
    weights = np.concatenate([fa.weights.ravel() / fa.n, -fb.weights.ravel() / fb.n])
    variances = np.concatenate([fa.variances.ravel(), fb.variances.ravel()])
    offsets = centers[:, None] - centers[None, :]
    cross = gaussian_density(offsets, variances[:, None] + variances[None, :])
    return float(max(weights @ cross @ weights, 0.0))


def l2_distance_sq(
    fa: MixtureEstimate | np.ndarray,
    fb: MixtureEstimate | np.ndarray,
    method: L2Method | str = L2Method.GRID,
    grid: EvaluationGrid | None = None,
) -> float:
    """``||fa - fb||_2**2`` 계산

    Args:
        fa: 혼합 추정치 또는 grid 위에서 평가된 값 벡터
        fb: 혼합 추정치 또는 grid 위에서 평가된 값 벡터
        method: ``grid`` 는 ``spacing * sum (fa - fb)**2`` 리만 합,
            ``exact`` 는 O((nJ)**2) 폐쇄형 전개 (테스트 기준값용)
        grid: grid 방식의 평가 격자

    Returns:
        L2 거리 제곱

    Raises:
        InvalidArgumentError: exact 에 값 벡터를 넘기거나, grid 가 없거나 길이가 다를 때
    """
    method = L2Method(method)
    if method == L2Method.EXACT:
        if not (isinstance(fa, MixtureEstimate) and isinstance(fb, MixtureEstimate)):
            raise InvalidArgumentError("exact L2 distance needs mixture estimates")
        return _exact_l2_sq(fa, fb)

    if grid is None:
        raise InvalidArgumentError("grid L2 distance needs an evaluation grid")
    va = fa.evaluate(grid) if isinstance(fa, MixtureEstimate) else np.asarray(fa, dtype=float)
    vb = fb.evaluate(grid) if isinstance(fb, MixtureEstimate) else np.asarray(fb, dtype=float)
    if va.shape != (len(grid),) or vb.shape != (len(grid),):
        raise InvalidArgumentError("estimates are not evaluated on the given grid")
    diff = va - vb
    return float(grid.spacing * np.dot(diff, diff))


@dataclass(slots=True)
class EstimatorMatrix:
    """Streaming state: one WW estimate per candidate, on a fixed grid.

    Single writer. ``snapshot()`` gives readers a consistent copy between
    updates. The raw sample is not retained.
    """

    gamma_grid: GammaGrid
    eval_grid: EvaluationGrid
    kernel: GaussianMixtureKernel
    values: np.ndarray = field(init=False)
    n: int = 0
    kernel_evaluations: int = 0
    # sum_k <K_{h_k(ref)}, K_{h_k(row)}>, the unscaled LMR penalty per row
    penalty_sums: np.ndarray = field(init=False)
    _schedules: list[BandwidthSchedule] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self.values = np.zeros((len(self.gamma_grid), len(self.eval_grid)))
        self.penalty_sums = np.zeros(len(self.gamma_grid))
        self._schedules = self.gamma_grid.schedules()

    @classmethod
    def from_sample(
        cls,
        sample: Sample,
        gamma_grid: GammaGrid,
        eval_grid: EvaluationGrid,
        kernel: GaussianMixtureKernel,
    ) -> "EstimatorMatrix":
        state = cls(gamma_grid=gamma_grid, eval_grid=eval_grid, kernel=kernel)
        state.absorb(sample.observations)
        return state

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def next_bandwidths(self) -> np.ndarray:
        """``h_{n+1}`` for every candidate row."""
        k = self.n + 1
        return np.array([s.bandwidths(1, start=k)[0] for s in self._schedules])

    def update(self, x_new: float) -> "EstimatorMatrix":
        """관측치 하나를 모든 후보 행에 반영 (제자리 갱신)

        Args:
            x_new: 새 관측치

        Returns:
            갱신된 self

        Raises:
            InvalidArgumentError: 유한하지 않은 관측치
        """
        x_new = float(x_new)
        if not math.isfinite(x_new):
            raise InvalidArgumentError(f"observation must be finite, got {x_new}")
        h = self.next_bandwidths()
        diff = x_new - self.eval_grid.points
        fresh = np.zeros_like(self.values)
        for weight, variance in self.kernel.components:
            fresh += weight * gaussian_density(diff[None, :], variance * (h * h)[:, None])
        self.kernel_evaluations += fresh.size * len(self.kernel.components)
        self.penalty_sums += self._penalty_terms(h)

        n = self.n
        if n == 0:
            self.values = fresh
        else:
            self.values = (n / (n + 1)) * self.values + fresh / (n + 1)
        self.n = n + 1
        return self

    def _penalty_terms(self, h: np.ndarray) -> np.ndarray:
        h_sq = h * h
        ref_sq = h_sq[self.gamma_grid.reference_index]
        terms = np.zeros_like(h)
        for wa, va in self.kernel.components:
            for wb, vb in self.kernel.components:
                terms += wa * wb * gaussian_density(0.0, va * ref_sq + vb * h_sq)
        return terms

    def absorb(self, observations: Iterable[float]) -> "EstimatorMatrix":
        for x in observations:
            self.update(x)
        return self

    def row(self, index: int) -> np.ndarray:
        return self.values[index].copy()

    def row_for(self, parameter: float) -> np.ndarray:
        matches = np.flatnonzero(self.gamma_grid.as_array() == parameter)
        if matches.size == 0:
            raise InvalidArgumentError(f"{parameter} is not a grid value")
        return self.row(int(matches[0]))

    def snapshot(self) -> "EstimatorMatrix":
        copy = EstimatorMatrix(
            gamma_grid=self.gamma_grid, eval_grid=self.eval_grid, kernel=self.kernel
        )
        copy.values = self.values.copy()
        copy.penalty_sums = self.penalty_sums.copy()
        copy.n = self.n
        copy.kernel_evaluations = self.kernel_evaluations
        return copy


def ww_update(state: EstimatorMatrix, x_new: float) -> EstimatorMatrix:
    """Absorb one observation into ``state`` (in place) and return it."""
    return state.update(x_new)
