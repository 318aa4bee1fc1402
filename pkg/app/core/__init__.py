"""Core module - 설정 및 에러 타입"""

from app.core.config import settings
from app.core.errors import (
    ConfigError,
    EstimationError,
    InvalidArgumentError,
    NumericError,
    SampleParseError,
    exit_code_for,
)

__all__ = [
    "settings",
    "ConfigError",
    "EstimationError",
    "InvalidArgumentError",
    "NumericError",
    "SampleParseError",
    "exit_code_for",
]
