import csv
import io
import json

import numpy as np

from app.schemas.experiment import BenchmarkMethod, MiseReport, TrajectoryRecord
from app.schemas.selection import CandidateScore, SelectionMethod, SelectionResult
from app.services.bandwidths import GammaGrid
from app.services.estimator import EstimatorMatrix, EvaluationGrid
from app.utils.writers import (
    emit,
    format_number,
    matrix_snapshot_csv,
    mise_csv,
    render_csv,
    render_json,
    selection_csv,
    trajectory_csv,
)


def _rows(text: str) -> list[list[str]]:
    return list(csv.reader(io.StringIO(text)))


def test_numbers_use_round_trip_form() -> None:
    assert format_number(0.1) == "0.1"
    assert float(format_number(1 / 3)) == 1 / 3
    assert format_number(np.float64(2.5)) == "2.5"
    assert format_number(np.int64(7)) == "7"
    assert format_number("K1") == "K1"


def test_render_csv_quotes_fields_with_commas() -> None:
    text = render_csv(["a", "b"], [["x,y", 1.0]])
    assert _rows(text) == [["a", "b"], ["x,y", "1.0"]]


def test_selection_csv_columns() -> None:
    result = SelectionResult(
        chosen_gamma=0.25,
        method=SelectionMethod.LMR,
        n=10,
        kernel="K1",
        per_candidate=[
            CandidateScore(gamma=0.25, criterion=0.1, penalty=0.05, distance_term=0.05),
            CandidateScore(gamma=0.5, criterion=0.2, penalty=0.2, distance_term=0.0),
        ],
    )
    assert _rows(selection_csv(result)) == [
        ["gamma", "criterion", "penalty"],
        ["0.25", "0.1", "0.05"],
        ["0.5", "0.2", "0.2"],
    ]
    assert json.loads(render_json(result))["chosen_gamma"] == 0.25


def test_mise_csv_layout() -> None:
    report = MiseReport(
        density="f1",
        method=BenchmarkMethod.WW_LMR,
        kernel_order=7,
        n=250,
        replications=2,
        mise_times_100=0.5,
        std_times_100=0.1,
        per_replication=[0.004, 0.006],
    )
    rows = _rows(mise_csv([report]))
    assert rows[0] == ["density", "n", "method", "kernel", "mise", "std"]
    assert rows[1] == ["f1", "250", "ww_lmr", "K7", "0.5", "0.1"]


def test_trajectory_csv() -> None:
    record = TrajectoryRecord(
        density="f2", kernel="K1", n_start=3, n_end=4, seed=1, gammas=[0.1, 0.2], grid=[0.1, 0.2]
    )
    assert _rows(trajectory_csv(record)) == [["k", "gamma"], ["3", "0.1"], ["4", "0.2"]]


def test_matrix_snapshot_has_grid_header(k1) -> None:
    state = EstimatorMatrix(
        gamma_grid=GammaGrid(values=(0.2, 0.4)),
        eval_grid=EvaluationGrid.linspace(-1.0, 1.0, 3),
        kernel=k1,
    )
    state.update(0.0)
    rows = _rows(matrix_snapshot_csv(state))
    assert rows[0] == ["equispaced_lmr", "-1.0", "0.0", "1.0"]
    assert [row[0] for row in rows[1:]] == ["0.2", "0.4"]
    assert float(rows[1][2]) == state.values[0, 1]


def test_emit_writes_files_or_stdout(tmp_path, capsys) -> None:
    path = emit("a,b\n", tmp_path / "deep" / "out.csv")
    assert path.read_text(encoding="utf-8") == "a,b\n"
    assert emit("x\n", None) is None
    assert capsys.readouterr().out == "x\n"
