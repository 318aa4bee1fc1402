import logging
import math

import numpy as np
import pytest

from app.core.errors import InvalidArgumentError
from app.schemas.selection import SelectionMethod
from app.services.bandwidths import (
    BandwidthSchedule,
    GammaGrid,
    GridKind,
    make_grid,
)
from app.services.densities import SeededStream, density_by_name, density_sample
from app.services.estimator import EstimatorMatrix, EvaluationGrid, Sample
from app.services.kernels import kernel_by_name, norms
from app.services.selection import (
    _argmin_with_ties,
    gl_select,
    gl_vn,
    lmr_penalty,
    lmr_select,
    lmr_select_fixed_h,
    lmr_select_matrix,
    penalty,
    selected_row,
    selection_grid,
)


def test_lmr_penalty_single_observation(k1) -> None:
    assert lmr_penalty(k1, 1, 0.5, 0.5) == pytest.approx(0.564190, abs=1e-6)
    assert lmr_penalty(k1, 1, 0.0, 1.0) == pytest.approx(0.564190, abs=1e-6)
    with pytest.raises(InvalidArgumentError):
        lmr_penalty(k1, 10, 0.6, 0.5)


def test_lmr_penalty_decreases_with_n(k3) -> None:
    assert lmr_penalty(k3, 100, 0.2, 0.5) < lmr_penalty(k3, 10, 0.2, 0.5)


def test_gl_vn(k1) -> None:
    schedule = BandwidthSchedule.power_law(1.0)
    assert gl_vn(k1, schedule, 3, 1.0) == pytest.approx(0.188063, abs=1e-6)
    assert gl_vn(k1, schedule, 3, 2.0) == pytest.approx(2 * gl_vn(k1, schedule, 3, 1.0))
    flat = BandwidthSchedule.power_law(0.0)
    assert gl_vn(k1, flat, 7, 1.0) == pytest.approx(norms(k1).l2_norm_sq / 7)
    with pytest.raises(InvalidArgumentError):
        gl_vn(k1, schedule, 3, -1.0)


def test_singleton_grids_echo_their_value(f1_sample, k1) -> None:
    assert lmr_select(f1_sample, k1, GammaGrid(values=(0.3,))).chosen_gamma == 0.3
    assert gl_select(f1_sample, k1, GammaGrid(values=(0.3,))).chosen_gamma == 0.3
    h_grid = GammaGrid(values=(0.4,), kind=GridKind.FIXED_H_LMR)
    result = lmr_select_fixed_h(f1_sample, k1, h_grid)
    assert result.chosen_gamma == 0.4
    assert result.parameter == "h"


def test_criterion_at_reference_is_the_penalty(f1_sample, k7) -> None:
    grid = make_grid(GridKind.EQUISPACED_LMR, size=10, gamma_max=0.5)
    result = lmr_select(f1_sample, k7, grid)
    last = result.per_candidate[-1]
    assert last.distance_term == 0.0
    assert last.criterion == pytest.approx(lmr_penalty(k7, len(f1_sample), 0.5, 0.5), rel=1e-12)
    for score in result.per_candidate:
        assert score.criterion >= score.penalty >= 0.0


def test_lmr_matches_independent_criterion(k7) -> None:
    sample = density_sample(density_by_name("f1"), SeededStream(2024), 1000)
    grid = make_grid(GridKind.EQUISPACED_LMR, size=40, gamma_max=0.5)
    eval_grid = selection_grid(sample, k7)
    result = lmr_select(sample, k7, grid, eval_grid)

    x = sample.observations
    n = x.size
    k = np.arange(1, n + 1, dtype=float)
    xs = eval_grid.points

    def estimate(gamma: float) -> np.ndarray:
        h = k ** (-gamma)
        u = (x[:, None] - xs[None, :]) / h[:, None]
        kern = sum(w * np.exp(-u * u / (2 * v)) / math.sqrt(2 * math.pi * v) for w, v in k7.components)
        return (kern / h[:, None]).mean(axis=0)

    reference = estimate(0.5)
    h_ref = k**-0.5
    criteria = []
    for gamma in grid.values:
        h = k ** (-gamma)
        pen = 0.0
        for wi, vi in k7.components:
            for wj, vj in k7.components:
                pen += wi * wj * np.sum(1.0 / (math.sqrt(2 * math.pi) * np.sqrt(vi * h_ref**2 + vj * h**2)))
        diff = estimate(gamma) - reference
        criteria.append(eval_grid.spacing * np.sum(diff**2) + 2 * pen / n**2)
    oracle = grid.values[int(np.argmin(criteria))]
    assert abs(result.chosen_gamma - oracle) <= grid.step() + 1e-12


def test_ties_prefer_smallest_gamma_or_largest_h() -> None:
    criteria = np.array([0.3, 0.1, 0.2, 0.1])
    assert _argmin_with_ties(criteria, prefer_last=False) == (1, True)
    assert _argmin_with_ties(criteria, prefer_last=True) == (3, True)
    assert _argmin_with_ties(np.array([0.2, 0.1]), prefer_last=True) == (1, False)


def test_choice_ignores_a_constant_offset(f1_sample, k3) -> None:
    result = lmr_select(f1_sample, k3, make_grid(GridKind.EQUISPACED_LMR, size=12, gamma_max=0.5))
    criteria = np.array(result.criteria)
    for offset in (0.5, 3.0, -0.001):
        index, _ = _argmin_with_ties(criteria + offset, prefer_last=False)
        assert index == result.chosen_index


def test_assumption_violation_is_only_logged(k7, caplog) -> None:
    sample = Sample.of([0.0, 0.1, -0.3])
    grid = make_grid(GridKind.FIXED_H_LMR, size=20, gamma_max=1.0)
    with caplog.at_level(logging.WARNING, logger="app.services.selection"):
        result = lmr_select(sample, k7, grid)
    assert result.assumption_ok is False
    assert "condition violated" in caplog.text


def test_gl_with_huge_upsilon_picks_smallest_gamma(f1_sample, k1) -> None:
    grid = make_grid(GridKind.SQRT_LOG_GL, n=len(f1_sample))
    result = gl_select(f1_sample, k1, grid, upsilon=1e6)
    assert result.method == SelectionMethod.GL
    assert result.chosen_gamma == grid.values[0]
    assert all(score.distance_term == 0.0 for score in result.per_candidate)


def test_beta_hat_readout(f1_sample, k1) -> None:
    lmr = lmr_select(f1_sample, k1, make_grid(GridKind.EQUISPACED_LMR, size=8, gamma_max=0.5))
    assert lmr.beta_hat == pytest.approx((1 / lmr.chosen_gamma - 1) / 2)
    gl = gl_select(f1_sample, k1, make_grid(GridKind.SQRT_LOG_GL, n=len(f1_sample)))
    assert gl.beta_hat == pytest.approx((1 / gl.chosen_gamma - 1) / 2)
    h_grid = make_grid(GridKind.FIXED_H_LMR, size=8, gamma_max=1.0)
    assert lmr_select_fixed_h(f1_sample, k1, h_grid).beta_hat is None


def test_gl_rejects_fixed_h_grid(f1_sample, k1) -> None:
    with pytest.raises(InvalidArgumentError):
        gl_select(f1_sample, k1, GammaGrid(values=(0.5,), kind=GridKind.FIXED_H_LMR))


def test_matrix_selection_matches_batch_selection(f1_sample, k3) -> None:
    grid = make_grid(GridKind.EQUISPACED_LMR, size=12, gamma_max=0.5)
    eval_grid = selection_grid(f1_sample, k3, 150)
    state = EstimatorMatrix.from_sample(f1_sample, grid, eval_grid, k3)
    streamed = lmr_select_matrix(state)
    batch = lmr_select(f1_sample, k3, grid, eval_grid)
    assert streamed.chosen_gamma == batch.chosen_gamma
    np.testing.assert_allclose(streamed.criteria, batch.criteria, rtol=1e-9)

    gamma, row = selected_row(state)
    assert gamma == streamed.chosen_gamma
    np.testing.assert_array_equal(row, state.row_for(gamma))


def test_matrix_selection_needs_observations(k1) -> None:
    state = EstimatorMatrix(
        gamma_grid=GammaGrid(values=(0.2,)),
        eval_grid=EvaluationGrid.linspace(-1, 1, 5),
        kernel=k1,
    )
    with pytest.raises(InvalidArgumentError):
        lmr_select_matrix(state)


def test_penalty_on_constant_schedules(k1) -> None:
    value = penalty(k1, 4, BandwidthSchedule.constant(0.5), BandwidthSchedule.constant(0.5))
    assert value == pytest.approx(2 * 4 / 16 / (2 * 0.5 * math.sqrt(math.pi)))


@pytest.mark.slow
def test_gl_with_theory_constant_is_mostly_grid_minimal(k1) -> None:
    density = density_by_name("f1")
    minimal = 0
    for r in range(50):
        sample = density_sample(density, SeededStream(77, r), 100)
        grid = make_grid(GridKind.SQRT_LOG_GL, n=100)
        minimal += gl_select(sample, k1, grid, upsilon=24.0).chosen_gamma == grid.values[0]
    assert minimal >= 45


@pytest.mark.slow
def test_lmr_mean_gamma_for_f1(k7) -> None:
    density = density_by_name("f1")
    grid = make_grid(GridKind.EQUISPACED_LMR, size=40, gamma_max=0.5)
    chosen = [
        lmr_select(density_sample(density, SeededStream(20190101, r), 1000), k7, grid).chosen_gamma
        for r in range(200)
    ]
    assert np.mean(chosen) == pytest.approx(0.044, abs=0.02)


@pytest.mark.slow
def test_gl_choice_moves_down_as_upsilon_grows(k1) -> None:
    density = density_by_name("f1")
    grid = make_grid(GridKind.SQRT_LOG_GL, n=100)
    agreeing = 0
    for r in range(100):
        sample = density_sample(density, SeededStream(31, r), 100)
        eval_grid = selection_grid(sample, k1, 150)
        low = gl_select(sample, k1, grid, upsilon=0.5, eval_grid=eval_grid).chosen_gamma
        high = gl_select(sample, k1, grid, upsilon=5.0, eval_grid=eval_grid).chosen_gamma
        agreeing += high <= low
    assert agreeing >= 95


@pytest.mark.slow
def test_fixed_h_grows_with_kernel_order() -> None:
    density = density_by_name("f1")
    h_grid = make_grid(GridKind.FIXED_H_LMR, size=20, gamma_max=1.0)
    means = []
    for name in ("K1", "K3", "K5", "K7"):
        kernel = kernel_by_name(name)
        chosen = []
        for r in range(100):
            sample = density_sample(density, SeededStream(20190101, r), 250)
            eval_grid = selection_grid(sample, kernel, 150)
            chosen.append(lmr_select_fixed_h(sample, kernel, h_grid, eval_grid).chosen_gamma)
        means.append(float(np.mean(chosen)))
    assert means[0] < means[1] and means[0] < means[-1]
    assert all(later >= earlier - 0.02 for earlier, later in zip(means, means[1:]))
