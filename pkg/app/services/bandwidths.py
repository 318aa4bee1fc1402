"""Bandwidth service: 대역폭 스케줄, 후보 격자, 수렴 속도 진단.

재귀 추정기는 ``h_k(gamma) = k**(-gamma)`` 를 쓰고, 상수 스케줄은
고정 대역폭 (Parzen-Rosenblatt) 추정기가 됩니다.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from app.core.errors import InvalidArgumentError

logger = logging.getLogger(__name__)


class ScheduleKind(str, Enum):
    POWER_LAW = "power_law"
    CONSTANT = "constant"


class GridKind(str, Enum):
    """후보 격자 종류"""

    EQUISPACED_LMR = "equispaced_lmr"
    SQRT_LOG_GL = "sqrt_log_gl"
    FIXED_H_LMR = "fixed_h_lmr"


@dataclass(frozen=True, slots=True)
class BandwidthSchedule:
    """Sequence of per-observation bandwidths ``h_1, h_2, ...``."""

    gamma: float = 0.0
    kind: ScheduleKind = ScheduleKind.POWER_LAW
    constant_h: float = 1.0

    def __post_init__(self) -> None:
        if self.kind == ScheduleKind.POWER_LAW:
            if not 0.0 <= self.gamma <= 1.0:
                raise InvalidArgumentError(f"gamma must lie in [0, 1], got {self.gamma}")
        elif not 0.0 < self.constant_h <= 1.0:
            raise InvalidArgumentError(
                f"constant bandwidth must lie in (0, 1], got {self.constant_h}"
            )

    @classmethod
    def power_law(cls, gamma: float) -> "BandwidthSchedule":
        return cls(gamma=float(gamma), kind=ScheduleKind.POWER_LAW)

    @classmethod
    def constant(cls, h: float) -> "BandwidthSchedule":
        return cls(kind=ScheduleKind.CONSTANT, constant_h=float(h))

    @property
    def parameter(self) -> float:
        """gamma for power-law schedules, h for constant ones."""
        return self.gamma if self.kind == ScheduleKind.POWER_LAW else self.constant_h

    def bandwidths(self, n: int, start: int = 1) -> np.ndarray:
        """``h_k`` for ``k = start, ..., start + n - 1``."""
        if start < 1:
            raise InvalidArgumentError(f"observation index must be >= 1, got {start}")
        if self.kind == ScheduleKind.CONSTANT:
            return np.full(n, self.constant_h)
        k = np.arange(start, start + n, dtype=float)
        return k ** (-self.gamma)


def bandwidth_at(schedule: BandwidthSchedule, k: int) -> float:
    if k < 1:
        raise InvalidArgumentError(f"observation index must be >= 1, got {k}")
    if schedule.kind == ScheduleKind.CONSTANT:
        return schedule.constant_h
    return float(k) ** (-schedule.gamma)


def harmonic_aggregate(schedule: BandwidthSchedule, n: int) -> float:
    """``n / sum_k 1/h_k``, the aggregate bandwidth driving the variance."""
    if n < 1:
        raise InvalidArgumentError(f"n must be >= 1, got {n}")
    return n / math.fsum(1.0 / schedule.bandwidths(n))


def theoretical_bias_sq(beta: float, gamma: float, n: int) -> float:
    """``B_n(gamma) = (1/n**2) |sum_k h_k**beta|**2`` by exact summation."""
    if n < 1:
        raise InvalidArgumentError(f"n must be >= 1, got {n}")
    if beta <= 0:
        raise InvalidArgumentError(f"beta must be positive, got {beta}")
    k = np.arange(1, n + 1, dtype=float)
    total = math.fsum(k ** (-gamma * beta))
    return (total / n) ** 2


def theoretical_variance(gamma: float, n: int) -> float:
    """``V_n(gamma) = (1/n**2) sum_k k**gamma`` by exact summation."""
    if n < 1:
        raise InvalidArgumentError(f"n must be >= 1, got {n}")
    k = np.arange(1, n + 1, dtype=float)
    return math.fsum(k**gamma) / (n * n)


def optimal_gamma(beta: float) -> float:
    """``1 / (2 beta + 1)``, balancing the bias and variance rates."""
    if beta <= 0:
        raise InvalidArgumentError(f"beta must be positive, got {beta}")
    return 1.0 / (2.0 * beta + 1.0)


def estimate_beta(gamma: float) -> float:
    """Heuristic regularity read-out inverting :func:`optimal_gamma`.

    Only meaningful for very large n; reported, never used for selection.
    """
    if not 0.0 < gamma <= 1.0:
        raise InvalidArgumentError(f"gamma must lie in (0, 1], got {gamma}")
    return (1.0 / gamma - 1.0) / 2.0


@dataclass(frozen=True, slots=True)
class GammaGrid:
    """Strictly increasing candidate set in (0, 1].

    For ``fixed_h_lmr`` the values are bandwidths ``h`` rather than exponents.
    """

    values: tuple[float, ...]
    kind: GridKind = GridKind.EQUISPACED_LMR

    def __post_init__(self) -> None:
        if not self.values:
            raise InvalidArgumentError("candidate grid must not be empty")
        for value in self.values:
            if not 0.0 < value <= 1.0:
                raise InvalidArgumentError(f"grid value {value} outside (0, 1]")
        if any(b <= a for a, b in zip(self.values, self.values[1:])):
            raise InvalidArgumentError("grid values must be strictly increasing")

    def __len__(self) -> int:
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)

    @property
    def is_fixed_h(self) -> bool:
        return self.kind == GridKind.FIXED_H_LMR

    @property
    def reference_index(self) -> int:
        """Overfitting reference: largest gamma, or smallest fixed h."""
        return 0 if self.is_fixed_h else len(self.values) - 1

    def schedules(self) -> list[BandwidthSchedule]:
        if self.is_fixed_h:
            return [BandwidthSchedule.constant(h) for h in self.values]
        return [BandwidthSchedule.power_law(g) for g in self.values]

    def step(self) -> float:
        """Largest gap between neighbours (one grid step for tolerance checks)."""
        if len(self.values) == 1:
            return 0.0
        return float(np.max(np.diff(self.as_array())))


def make_grid(
    kind: GridKind | str,
    n: int = 1,
    size: int = 40,
    gamma_max: float = 0.5,
) -> GammaGrid:
    """요청한 종류의 후보 격자 생성

    - ``equispaced_lmr``: ``i * gamma_max / size`` for ``i = 1..size``
    - ``sqrt_log_gl``: ``(i / [log n])**0.5`` for ``i = 1..[log n]``
    - ``fixed_h_lmr``: bandwidths ``i * gamma_max / size`` (``gamma_max = 1``
      gives the ``{k/M}`` set)

    Args:
        kind: 격자 종류
        n: 표본 크기 (sqrt_log_gl 에서만 사용)
        size: 격자 크기
        gamma_max: 최대 gamma (fixed_h_lmr 에서는 최대 h)

    Returns:
        GammaGrid

    Raises:
        InvalidArgumentError: 알 수 없는 종류, size < 1, 범위 밖 gamma_max, log(n) < 1
    """
    try:
        kind = GridKind(kind)
    except ValueError as exc:
        raise InvalidArgumentError(f"unknown grid kind {kind!r}") from exc
    if size < 1:
        raise InvalidArgumentError(f"grid size must be >= 1, got {size}")
    if not 0.0 < gamma_max <= 1.0:
        raise InvalidArgumentError(f"gamma_max must lie in (0, 1], got {gamma_max}")

    if kind == GridKind.SQRT_LOG_GL:
        if n < 1:
            raise InvalidArgumentError(f"n must be >= 1, got {n}")
        count = int(math.floor(math.log(n))) if n > 1 else 0
        if count < 1:
            raise InvalidArgumentError(f"sqrt-log grid needs log(n) >= 1, got n={n}")
        values = tuple(math.sqrt(i / count) for i in range(1, count + 1))
    else:
        values = tuple(i * gamma_max / size for i in range(1, size + 1))
    return GammaGrid(values=values, kind=kind)


def summability_check(
    grid_kind: GridKind | str,
    n_values: list[int],
    c: float = 1.0,
    r: float = 0.5,
    size: int = 40,
    gamma_max: float = 0.5,
) -> list[float]:
    """``sum_{gamma'} exp(-c / h_n(gamma')**r)`` for each n.

    Bounded values over growing n indicate the grid meets the summability
    condition of the Goldenshluger-Lepski analysis. Shipped grids are checked
    in tests; user grids are not enforced.
    """
    sums: list[float] = []
    for n in n_values:
        grid = make_grid(grid_kind, n=n, size=size, gamma_max=gamma_max)
        total = 0.0
        for schedule in grid.schedules():
            aggregate = harmonic_aggregate(schedule, n)
            total += math.exp(-c / aggregate**r)
        sums.append(total)
    if len(sums) > 1 and sums[-1] > 2.0 * max(sums[:-1]):
        logger.warning(
            "Grid %s looks non-summable: sums=%s", GridKind(grid_kind).value, sums
        )
    return sums
