"""Error types shared by the estimation services and the CLI.

This module provides small, predictable exception types so that:
- the CLI can map failures to process exit codes
- tests can assert failure modes without depending on numpy/scipy internals
"""

from __future__ import annotations

from typing import Any, Optional


class ErrorCode:
    """에러 코드 상수"""

    INVALID_ARGUMENT = "INVALID_ARGUMENT"
    NUMERIC_ERROR = "NUMERIC_ERROR"
    PARSE_ERROR = "PARSE_ERROR"
    IO_ERROR = "IO_ERROR"
    CONFIG_ERROR = "CONFIG_ERROR"
    INTERNAL_ERROR = "INTERNAL_ERROR"


class EstimationError(Exception):
    """Base class for every error raised by the package."""

    code: str = ErrorCode.INTERNAL_ERROR

    def __init__(self, message: str):
        self.message = message
        super().__init__(message)


class InvalidArgumentError(EstimationError, ValueError):
    """Raised when an operation receives an argument outside its domain."""

    code = ErrorCode.INVALID_ARGUMENT


class NumericError(EstimationError, ArithmeticError):
    """Raised when quadrature or another numerical routine fails to converge."""

    code = ErrorCode.NUMERIC_ERROR

    def __init__(self, message: str, diagnostics: Optional[dict[str, Any]] = None):
        self.diagnostics = dict(diagnostics or {})
        super().__init__(message)

    def __str__(self) -> str:
        if not self.diagnostics:
            return self.message
        details = ", ".join(f"{k}={v}" for k, v in self.diagnostics.items())
        return f"{self.message} ({details})"


class SampleParseError(EstimationError):
    """Raised when a sample file holds a line that is not a finite decimal."""

    code = ErrorCode.PARSE_ERROR

    def __init__(self, message: str, line_number: Optional[int] = None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)


class ConfigError(EstimationError):
    """Raised when a run configuration is missing, malformed or inconsistent."""

    code = ErrorCode.CONFIG_ERROR


def exit_code_for(error: BaseException) -> int:
    """예외를 프로세스 종료 코드로 변환

    Args:
        error: 발생한 예외

    Returns:
        0이 아닌 종료 코드
    """
    if isinstance(error, OSError):
        return 4
    if not isinstance(error, EstimationError):
        return 1

    exit_code_map = {
        ErrorCode.INVALID_ARGUMENT: 2,
        ErrorCode.PARSE_ERROR: 3,
        ErrorCode.IO_ERROR: 4,
        ErrorCode.NUMERIC_ERROR: 5,
        ErrorCode.CONFIG_ERROR: 6,
    }
    return exit_code_map.get(error.code, 1)
