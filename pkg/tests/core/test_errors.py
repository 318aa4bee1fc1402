import pytest

from app.core.config import Settings
from app.core.errors import (
    ConfigError,
    EstimationError,
    InvalidArgumentError,
    NumericError,
    SampleParseError,
    exit_code_for,
)


@pytest.mark.parametrize(
    ("error", "code"),
    [
        (InvalidArgumentError("bad"), 2),
        (SampleParseError("bad", 4), 3),
        (FileNotFoundError("missing"), 4),
        (NumericError("diverged"), 5),
        (ConfigError("bad"), 6),
        (EstimationError("other"), 1),
        (RuntimeError("boom"), 1),
    ],
)
def test_exit_codes(error: BaseException, code: int) -> None:
    assert exit_code_for(error) == code


def test_invalid_argument_is_a_value_error() -> None:
    with pytest.raises(ValueError):
        raise InvalidArgumentError("gamma out of range")


def test_numeric_error_reports_diagnostics() -> None:
    error = NumericError("quadrature failed", {"abserr": 0.1})
    assert str(error) == "quadrature failed (abserr=0.1)"
    assert error.diagnostics == {"abserr": 0.1}


def test_settings_read_prefixed_environment(monkeypatch) -> None:
    monkeypatch.setenv("WWKDE_GRID_SIZE", "12")
    monkeypatch.setenv("WWKDE_SEED", "99")
    configured = Settings()
    assert configured.GRID_SIZE == 12
    assert configured.SEED == 99
