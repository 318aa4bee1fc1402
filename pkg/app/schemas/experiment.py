"""Experiment Schemas - 몬테카를로 실험 결과 스키마"""

from enum import Enum
from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator


class BenchmarkMethod(str, Enum):
    """벤치마크 추정 방법"""
    WW_LMR = "ww_lmr"
    LMR_FIXED = "lmr_fixed"
    WW_FROZEN = "ww_frozen"
    WW_GL = "ww_gl"


class MiseReport(BaseModel):
    """100 x MISE 와 100 x std (복제별 ISE 포함)"""
    density: str
    method: BenchmarkMethod
    kernel_order: int
    n: int
    replications: int = Field(ge=2)
    mise_times_100: float
    std_times_100: float
    per_replication: List[float]
    selected: List[float] = Field(default_factory=list)

    @model_validator(mode="after")
    def _check_lengths(self) -> "MiseReport":
        if len(self.per_replication) != self.replications:
            raise ValueError("per_replication must hold one ISE per replication")
        return self


class TrajectoryRecord(BaseModel):
    """온라인 선택 궤적 (k, gamma_k)"""
    density: str
    kernel: str
    n_start: int = Field(ge=1)
    n_end: int
    seed: int
    stream_id: int = 0
    gammas: List[float]
    grid: List[float]
    kernel_evaluations: int = 0

    @model_validator(mode="after")
    def _check_length(self) -> "TrajectoryRecord":
        if self.n_end < self.n_start:
            raise ValueError("n_end must be >= n_start")
        if len(self.gammas) != self.n_end - self.n_start + 1:
            raise ValueError("trajectory must hold one gamma per step")
        return self

    @property
    def steps(self) -> list[int]:
        return list(range(self.n_start, self.n_end + 1))


class GammaMeanRow(BaseModel):
    """n 별 선택된 gamma 의 평균과 표준편차

    ``mean_beta_hat`` 은 평균 gamma 에서 읽은 (1/gamma - 1)/2 입니다
    (휴리스틱 read-out, 추정량이 아님).
    """
    n: int
    mean_gamma: float
    std_gamma: float
    mean_beta_hat: Optional[float] = None
    per_replication: List[float]


class GammaMeanTable(BaseModel):
    density: str
    kernel: str
    replications: int
    rows: List[GammaMeanRow]
    seed: Optional[int] = None


class GridParams(BaseModel):
    """후보 격자 및 선택 설정

    ``kind`` 가 None 이면 방법별 기본 격자 (ww_lmr: ``settings.GRID_KIND``,
    ww_gl: sqrt_log_gl, lmr_fixed: fixed_h_lmr).
    """

    model_config = ConfigDict(extra="forbid")

    kind: Optional[Literal["equispaced_lmr", "sqrt_log_gl", "fixed_h_lmr"]] = None
    size: int = Field(default=40, ge=1)
    gamma_max: float = Field(default=0.5, gt=0.0, le=1.0)
    h_max: float = Field(default=1.0, gt=0.0, le=1.0)
    upsilon: float = Field(default=1.0, ge=0.0)
    selection_points: int = Field(default=300, ge=2)
    extension_sd: float = Field(default=3.0, ge=0.0)
    eval_points: int = Field(default=100, ge=2)
