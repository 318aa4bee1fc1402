"""Pydantic Schemas - 결과/설정 스키마 정의"""

from app.schemas.experiment import (
    BenchmarkMethod,
    GammaMeanRow,
    GammaMeanTable,
    GridParams,
    MiseReport,
    TrajectoryRecord,
)
from app.schemas.run_config import (
    BenchmarkConfig,
    EstimateConfig,
    ExperimentKind,
    FrozenConfig,
    OutputFormat,
    RunConfig,
    SelectConfig,
    StreamConfig,
    TrajectoryConfig,
)
from app.schemas.selection import CandidateScore, SelectionMethod, SelectionResult

__all__ = [
    # Selection
    "CandidateScore",
    "SelectionMethod",
    "SelectionResult",
    # Experiment
    "BenchmarkMethod",
    "GammaMeanRow",
    "GammaMeanTable",
    "GridParams",
    "MiseReport",
    "TrajectoryRecord",
    # Run config
    "BenchmarkConfig",
    "EstimateConfig",
    "ExperimentKind",
    "FrozenConfig",
    "OutputFormat",
    "RunConfig",
    "SelectConfig",
    "StreamConfig",
    "TrajectoryConfig",
]
