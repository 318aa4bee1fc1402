"""Run Config Schemas - 명령별 실행 설정

파일(TOML/JSON)의 명령별 섹션과 CLI 플래그가 합쳐진 뒤 이 모델로 검증됩니다.
알 수 없는 키는 거부합니다.
"""

from enum import Enum
from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.schemas.experiment import BenchmarkMethod, GridParams
from app.schemas.selection import SelectionMethod


class OutputFormat(str, Enum):
    CSV = "csv"
    JSON = "json"


class ExperimentKind(str, Enum):
    """benchmark 하위 실험"""
    MISE = "mise"
    GAMMA_MEAN = "gamma-mean"
    CURVES = "curves"
    BEAMS = "beams"


class RunConfig(BaseModel):
    """모든 명령의 공통 필드"""

    model_config = ConfigDict(extra="forbid", use_enum_values=False)

    kernel: str = "K1"
    out: Optional[str] = None
    format: OutputFormat = OutputFormat.CSV
    log_level: Optional[str] = None


class EstimateConfig(RunConfig):
    input: Optional[str] = None
    gamma: float = Field(default=0.2, ge=0.0, le=1.0)
    fixed_h: Optional[float] = Field(default=None, gt=0.0, le=1.0)
    a: Optional[float] = None
    b: Optional[float] = None
    points: int = Field(default=100, ge=2)
    extension_sd: float = Field(default=3.0, ge=0.0)

    @model_validator(mode="after")
    def _check_range(self) -> "EstimateConfig":
        if (self.a is None) != (self.b is None):
            raise ValueError("a and b must be given together")
        if self.a is not None and self.b is not None and not self.b > self.a:
            raise ValueError("grid range must satisfy a < b")
        return self


class SelectConfig(RunConfig):
    input: Optional[str] = None
    method: SelectionMethod = SelectionMethod.LMR
    grid_kind: Optional[Literal["equispaced_lmr", "sqrt_log_gl", "fixed_h_lmr"]] = None
    grid_size: int = Field(default=40, ge=1)
    gamma_max: float = Field(default=0.5, gt=0.0, le=1.0)
    upsilon: float = Field(default=1.0, ge=0.0)
    points: int = Field(default=300, ge=2)
    extension_sd: float = Field(default=3.0, ge=0.0)
    format: OutputFormat = OutputFormat.JSON


class BenchmarkConfig(RunConfig):
    experiment: ExperimentKind = ExperimentKind.MISE
    densities: List[str] = Field(default_factory=lambda: ["f1"])
    methods: List[BenchmarkMethod] = Field(default_factory=lambda: [BenchmarkMethod.WW_LMR])
    kernels: List[str] = Field(default_factory=lambda: ["K1"])
    n: List[int] = Field(default_factory=lambda: [250])
    reps: int = Field(default=50, ge=2)
    seed: int = 20190101
    workers: int = Field(default=1, ge=1)
    grid: GridParams = Field(default_factory=GridParams)

    @model_validator(mode="after")
    def _check_values(self) -> "BenchmarkConfig":
        if not self.densities or not self.methods or not self.kernels or not self.n:
            raise ValueError("densities, methods, kernels and n must not be empty")
        if any(n < 2 for n in self.n):
            raise ValueError("every n must be >= 2")
        if BenchmarkMethod.WW_FROZEN in self.methods:
            raise ValueError("ww_frozen runs through the frozen command")
        return self


class FrozenConfig(RunConfig):
    density: str = "f1"
    n0: int = Field(default=500, ge=2)
    n1: int = Field(default=500, ge=0)
    reps: int = Field(default=50, ge=2)
    seed: int = 20190101
    workers: int = Field(default=1, ge=1)
    grid: GridParams = Field(default_factory=GridParams)


class TrajectoryConfig(RunConfig):
    density: str = "f1"
    n_start: int = Field(default=50, ge=1)
    n_end: int = Field(default=1000, ge=1)
    grid_size: int = Field(default=50, ge=1)
    gamma_max: float = Field(default=0.5, gt=0.0, le=1.0)
    points: int = Field(default=100, ge=2)
    seed: int = 20190101
    stream_id: int = Field(default=0, ge=0)

    @model_validator(mode="after")
    def _check_steps(self) -> "TrajectoryConfig":
        if self.n_end < self.n_start:
            raise ValueError("n_end must be >= n_start")
        return self


class StreamConfig(RunConfig):
    input: Optional[str] = None
    grid_size: int = Field(default=50, ge=1)
    gamma_max: float = Field(default=0.5, gt=0.0, le=1.0)
    points: int = Field(default=100, ge=2)
    warmup: int = Field(default=50, ge=1)
    extension_sd: float = Field(default=3.0, ge=0.0)
    snapshot_every: int = Field(default=0, ge=0)
    snapshot_out: Optional[str] = None


COMMAND_CONFIGS: dict[str, type[RunConfig]] = {
    "estimate": EstimateConfig,
    "select": SelectConfig,
    "benchmark": BenchmarkConfig,
    "frozen": FrozenConfig,
    "trajectory": TrajectoryConfig,
    "stream": StreamConfig,
}
