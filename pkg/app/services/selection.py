"""Selection service: 데이터 기반 대역폭 지수 선택 (LMR, GL).

두 가지 규칙을 구현합니다:

- penalized comparison to the overfitting estimate (LMR):
  ``Crit(g) = ||f_g - f_gmax||^2 + pen(g)``,
  ``pen(g) = (2/n^2) sum_k <K_{h_k(gmax)}, K_{h_k(g)}>``
- Goldenshluger-Lepski (GL):
  ``A_n(g) + V_n(g)`` with ``A_n(g) = sup_g' (||f_g' - f_{g,g'}||^2 - V_n(g'))_+``

L2 거리는 표본 범위보다 넓힌 평가 격자 위 리만 합이고, 페널티는 폐쇄형입니다.
"""

from __future__ import annotations

import logging
import math
from typing import Sequence

import numpy as np

from app.core.config import settings
from app.core.errors import InvalidArgumentError
from app.schemas.selection import CandidateScore, SelectionMethod, SelectionResult
from app.services.bandwidths import (
    BandwidthSchedule,
    GammaGrid,
    GridKind,
    estimate_beta,
    harmonic_aggregate,
)
from app.services.estimator import (
    EstimatorMatrix,
    EvaluationGrid,
    MixtureEstimate,
    Sample,
    ww_evaluate,
)
from app.services.kernels import GaussianMixtureKernel, SQRT_2PI, norms

logger = logging.getLogger(__name__)


def _require_inputs(sample: Sample, grid: GammaGrid) -> None:
    if len(sample) == 0:
        raise InvalidArgumentError("sample must contain at least one observation")
    if len(grid) == 0:
        raise InvalidArgumentError("candidate grid must not be empty")


def selection_grid(
    sample: Sample,
    kernel: GaussianMixtureKernel,
    points: int | None = None,
    extension_sd: float | None = None,
) -> EvaluationGrid:
    """Sample range extended by a few kernel standard deviations."""
    a, b = sample.range
    return EvaluationGrid.extended(
        a,
        b,
        kernel,
        settings.SELECTION_POINTS if points is None else points,
        settings.EXTENSION_SD if extension_sd is None else extension_sd,
    )


# ===========================================
# LMR
# ===========================================


def penalty(
    kernel: GaussianMixtureKernel,
    n: int,
    schedule: BandwidthSchedule,
    reference: BandwidthSchedule,
) -> float:
    """``(2/n^2) sum_k <K_{h_k(reference)}, K_{h_k(schedule)}>`` in closed form."""
    if n < 1:
        raise InvalidArgumentError(f"n must be >= 1, got {n}")
    h_sq = schedule.bandwidths(n) ** 2
    ref_sq = reference.bandwidths(n) ** 2
    total = 0.0
    for wa, va in kernel.components:
        for wb, vb in kernel.components:
            total += wa * wb * math.fsum(1.0 / (SQRT_2PI * np.sqrt(va * ref_sq + vb * h_sq)))
    return 2.0 * total / (n * n)


def lmr_penalty(
    kernel: GaussianMixtureKernel, n: int, gamma: float, gamma_max: float
) -> float:
    if gamma > gamma_max:
        raise InvalidArgumentError(
            f"gamma={gamma} exceeds the overfitting reference gamma_max={gamma_max}"
        )
    return penalty(
        kernel,
        n,
        BandwidthSchedule.power_law(gamma),
        BandwidthSchedule.power_law(gamma_max),
    )


def _argmin_with_ties(criteria: np.ndarray, prefer_last: bool) -> tuple[int, bool]:
    best = float(np.min(criteria))
    ties = np.flatnonzero(criteria == best)
    index = int(ties[-1] if prefer_last else ties[0])
    return index, bool(ties.size > 1)


def check_lmr_assumption(
    kernel: GaussianMixtureKernel, n: int, smallest_bandwidth: float
) -> bool:
    """``||K||_inf ||K||_1 / (n h_n(gmax)) <= 1``; a violation is only logged."""
    constants = norms(kernel)
    ratio = constants.sup_norm * constants.l1_norm / (n * smallest_bandwidth)
    if ratio > 1.0:
        logger.warning(
            "LMR kernel condition violated: ||K||_inf ||K||_1 / (n h_n) = %.4g > 1 "
            "(kernel=%s, n=%s); selection proceeds",
            ratio,
            kernel.name,
            n,
        )
        return False
    return True


def lmr_from_rows(
    rows: np.ndarray,
    spacing: float,
    kernel: GaussianMixtureKernel,
    grid: GammaGrid,
    n: int,
    penalties: np.ndarray | None = None,
) -> SelectionResult:
    """LMR selection from estimates already evaluated on a common grid.

    ``rows[j]`` is the estimate for ``grid.values[j]``. Precomputed
    ``penalties`` skip the O(n) closed-form sums.
    """
    if rows.shape[0] != len(grid):
        raise InvalidArgumentError("one estimate row per candidate is required")
    schedules = grid.schedules()
    ref = grid.reference_index
    reference = schedules[ref]

    diff = rows - rows[ref][None, :]
    distances = spacing * np.einsum("ij,ij->i", diff, diff)
    if penalties is None:
        penalties = np.array([penalty(kernel, n, s, reference) for s in schedules])
    criteria = distances + penalties

    index, tie_broken = _argmin_with_ties(criteria, prefer_last=grid.is_fixed_h)
    assumption_ok = check_lmr_assumption(
        kernel, n, reference.bandwidths(1, start=n)[0]
    )
    return SelectionResult(
        chosen_gamma=grid.values[index],
        method=SelectionMethod.LMR,
        parameter="h" if grid.is_fixed_h else "gamma",
        n=n,
        kernel=kernel.name,
        per_candidate=[
            CandidateScore(
                gamma=g, criterion=float(c), penalty=float(p), distance_term=float(d)
            )
            for g, c, p, d in zip(grid.values, criteria, penalties, distances)
        ],
        tie_broken=tie_broken,
        assumption_ok=assumption_ok,
        beta_hat=None if grid.is_fixed_h else estimate_beta(grid.values[index]),
    )


def estimate_rows(
    sample: Sample, kernel: GaussianMixtureKernel, grid: GammaGrid, eval_grid: EvaluationGrid
) -> np.ndarray:
    return np.vstack([ww_evaluate(sample, kernel, s, eval_grid) for s in grid.schedules()])


def lmr_select(
    sample: Sample,
    kernel: GaussianMixtureKernel,
    grid: GammaGrid,
    eval_grid: EvaluationGrid | None = None,
) -> SelectionResult:
    """WW 추정기의 LMR gamma 선택

    Args:
        sample: 관측치
        kernel: 커널
        grid: 후보 격자 (기준은 가장 큰 gamma, 고정 h 격자면 가장 작은 h)
        eval_grid: 평가 격자 (없으면 selection_grid)

    Returns:
        SelectionResult (동점이면 가장 매끄러운 후보)

    Raises:
        InvalidArgumentError: 빈 표본 또는 빈 격자
    """
    _require_inputs(sample, grid)
    eval_grid = eval_grid or selection_grid(sample, kernel)
    rows = estimate_rows(sample, kernel, grid, eval_grid)
    result = lmr_from_rows(rows, eval_grid.spacing, kernel, grid, len(sample))
    logger.debug("LMR selected %s=%s (n=%s)", result.parameter, result.chosen_gamma, len(sample))
    return result


def lmr_select_fixed_h(
    sample: Sample,
    kernel: GaussianMixtureKernel,
    h_grid: GammaGrid,
    eval_grid: EvaluationGrid | None = None,
) -> SelectionResult:
    """Original fixed-bandwidth LMR; the smallest h is the overfitting reference."""
    if not h_grid.is_fixed_h:
        h_grid = GammaGrid(values=h_grid.values, kind=GridKind.FIXED_H_LMR)
    return lmr_select(sample, kernel, h_grid, eval_grid)


def lmr_select_matrix(state: EstimatorMatrix) -> SelectionResult:
    """LMR choice straight from the streaming matrix (no re-evaluation)."""
    if state.n == 0:
        raise InvalidArgumentError("estimator matrix has not absorbed any observation")
    return lmr_from_rows(
        state.values,
        state.eval_grid.spacing,
        state.kernel,
        state.gamma_grid,
        state.n,
        penalties=2.0 * state.penalty_sums / (state.n * state.n),
    )


def selected_row(state: EstimatorMatrix) -> tuple[float, np.ndarray]:
    """Currently selected parameter and its estimate row."""
    result = lmr_select_matrix(state)
    return result.chosen_gamma, state.row(result.chosen_index)


# ===========================================
# Goldenshluger-Lepski
# ===========================================


def gl_vn(
    kernel: GaussianMixtureKernel,
    schedule: BandwidthSchedule,
    n: int,
    upsilon: float,
) -> float:
    """``V_n = upsilon ||K||_2^2 ||K||_1^2 / (n hbar_n)``."""
    if upsilon < 0:
        raise InvalidArgumentError(f"upsilon must be nonnegative, got {upsilon}")
    constants = norms(kernel)
    inverse_aggregate = 1.0 / harmonic_aggregate(schedule, n)
    return upsilon * constants.l2_norm_sq * constants.l1_norm**2 * inverse_aggregate / n


def gl_distance_table(
    sample: Sample,
    kernel: GaussianMixtureKernel,
    gammas: Sequence[float],
    eval_grid: EvaluationGrid,
) -> np.ndarray:
    """``D[i, j] = ||f_{g_j} - f_{g_i, g_j}||^2`` on ``eval_grid``."""
    schedules = [BandwidthSchedule.power_law(g) for g in gammas]
    plain = [ww_evaluate(sample, kernel, s, eval_grid) for s in schedules]
    m = len(schedules)
    convolved: dict[tuple[int, int], np.ndarray] = {}
    for i in range(m):
        for j in range(i, m):
            # f_{g,g'} is symmetric in (g, g')
            convolved[(i, j)] = MixtureEstimate.convolved(
                sample, kernel, schedules[i], schedules[j]
            ).evaluate(eval_grid)
    table = np.empty((m, m))
    for i in range(m):
        for j in range(m):
            diff = plain[j] - convolved[(min(i, j), max(i, j))]
            table[i, j] = eval_grid.spacing * float(np.dot(diff, diff))
    return table


def gl_select(
    sample: Sample,
    kernel: GaussianMixtureKernel,
    grid: GammaGrid,
    upsilon: float | None = None,
    eval_grid: EvaluationGrid | None = None,
) -> SelectionResult:
    """Goldenshluger-Lepski gamma 선택

    Args:
        sample: 관측치
        kernel: 커널
        grid: gamma 후보 격자
        upsilon: 튜닝 상수 (없으면 settings.UPSILON)
        eval_grid: 평가 격자 (없으면 selection_grid)

    Returns:
        SelectionResult

    Raises:
        InvalidArgumentError: 빈 입력 또는 고정 h 격자
    """
    _require_inputs(sample, grid)
    if grid.is_fixed_h:
        raise InvalidArgumentError("GL selection works on gamma grids only")
    upsilon = settings.UPSILON if upsilon is None else upsilon
    eval_grid = eval_grid or selection_grid(sample, kernel)
    n = len(sample)

    vn = np.array([gl_vn(kernel, s, n, upsilon) for s in grid.schedules()])
    table = gl_distance_table(sample, kernel, grid.values, eval_grid)
    an = np.max(np.maximum(table - vn[None, :], 0.0), axis=1)
    criteria = an + vn

    index, tie_broken = _argmin_with_ties(criteria, prefer_last=False)
    logger.debug("GL selected gamma=%s (n=%s, upsilon=%s)", grid.values[index], n, upsilon)
    return SelectionResult(
        chosen_gamma=grid.values[index],
        method=SelectionMethod.GL,
        n=n,
        kernel=kernel.name,
        per_candidate=[
            CandidateScore(
                gamma=g, criterion=float(c), penalty=float(v), distance_term=float(a)
            )
            for g, c, v, a in zip(grid.values, criteria, vn, an)
        ],
        tie_broken=tie_broken,
        upsilon=upsilon,
        beta_hat=estimate_beta(grid.values[index]),
    )
