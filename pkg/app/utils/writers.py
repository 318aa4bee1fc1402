"""Result Writers - CSV/JSON 결과 파일 생성

모든 숫자는 가장 짧은 round-trip 10진 표현(``repr``)으로 기록하므로
같은 입력과 시드에서 바이트 단위로 동일한 파일이 나옵니다.
"""

import csv
import io
import json
import sys
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np
from pydantic import BaseModel

from app.schemas.experiment import GammaMeanTable, MiseReport, TrajectoryRecord
from app.schemas.selection import SelectionResult
from app.services.estimator import EstimatorMatrix


def format_number(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def render_csv(header: Sequence[Any], rows: Iterable[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow([format_number(h) for h in header])
    for row in rows:
        writer.writerow([format_number(v) for v in row])
    return buffer.getvalue()


def emit(text: str, path: str | Path | None) -> Path | None:
    """경로가 없거나 ``"-"`` 이면 표준 출력으로 씁니다."""
    if path is None or str(path) == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return None
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    return path


def render_json(payload: BaseModel | dict[str, Any]) -> str:
    if isinstance(payload, BaseModel):
        payload = payload.model_dump(mode="json")
    return json.dumps(payload, indent=2, ensure_ascii=False) + "\n"


# ===========================================
# 결과별 CSV 형식
# ===========================================


def estimate_csv(points: np.ndarray, values: np.ndarray) -> str:
    return render_csv(["x", "f_hat"], zip(points, values))


def selection_csv(result: SelectionResult) -> str:
    return render_csv(
        [result.parameter, "criterion", "penalty"],
        ((c.gamma, c.criterion, c.penalty) for c in result.per_candidate),
    )


def mise_csv(reports: Sequence[MiseReport]) -> str:
    """밀도, n, 방법, 커널, 100 x MISE, 100 x std"""
    return render_csv(
        ["density", "n", "method", "kernel", "mise", "std"],
        (
            (
                r.density,
                r.n,
                r.method.value,
                f"K{r.kernel_order}",
                r.mise_times_100,
                r.std_times_100,
            )
            for r in reports
        ),
    )


def trajectory_csv(record: TrajectoryRecord) -> str:
    return render_csv(["k", "gamma"], zip(record.steps, record.gammas))


def matrix_snapshot_csv(state: EstimatorMatrix) -> str:
    """헤더 = 격자점, 행 = 후보 하나 (첫 열은 후보 값)"""
    header = [state.gamma_grid.kind.value, *state.eval_grid.points]
    rows = ([g, *row] for g, row in zip(state.gamma_grid.values, state.values))
    return render_csv(header, rows)


def gamma_mean_csv(tables: Sequence[GammaMeanTable]) -> str:
    return render_csv(
        ["density", "kernel", "n", "mean_gamma", "std_gamma", "mean_beta_hat"],
        (
            (t.density, t.kernel, r.n, r.mean_gamma, r.std_gamma, r.mean_beta_hat)
            for t in tables
            for r in t.rows
        ),
    )


def curves_csv(
    points: np.ndarray, labels: Sequence[str], curves: np.ndarray, truth: np.ndarray
) -> str:
    """한 행에 격자점 하나: x, 참 밀도, 곡선별 값"""
    return render_csv(
        ["x", "truth", *labels],
        ([x, t, *column] for x, t, column in zip(points, truth, curves.T)),
    )
