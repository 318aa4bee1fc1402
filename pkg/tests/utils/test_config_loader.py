import json

import pytest

from app.core.config import settings
from app.core.errors import ConfigError
from app.schemas.run_config import BenchmarkConfig, SelectConfig
from app.utils.config_loader import read_config_file, resolve_config, sidecar_path, write_sidecar


def test_defaults_come_from_settings() -> None:
    config = resolve_config("benchmark")
    assert isinstance(config, BenchmarkConfig)
    assert config.reps == settings.REPLICATIONS
    assert config.seed == settings.SEED
    assert config.grid.size == settings.GRID_SIZE


def test_toml_section_and_flag_precedence(tmp_path) -> None:
    path = tmp_path / "run.toml"
    path.write_text(
        '[select]\nmethod = "gl"\nupsilon = 3.0\n\n[benchmark]\nreps = 7\n', encoding="utf-8"
    )
    config = resolve_config("select", path, {"upsilon": 5.0, "kernel": None})
    assert isinstance(config, SelectConfig)
    assert config.method.value == "gl"
    assert config.upsilon == 5.0
    assert config.kernel == settings.DEFAULT_KERNEL


def test_nested_grid_overrides_merge(tmp_path) -> None:
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"benchmark": {"grid": {"size": 12}}}), encoding="utf-8")
    config = resolve_config("benchmark", path, {"grid": {"upsilon": 2.0}})
    assert config.grid.size == 12
    assert config.grid.upsilon == 2.0
    assert config.grid.gamma_max == settings.GAMMA_MAX


def test_unknown_keys_and_sections_are_rejected(tmp_path) -> None:
    path = tmp_path / "bad.toml"
    path.write_text("[select]\nbogus = 1\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        resolve_config("select", path)

    path.write_text("[plot]\nx = 1\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        read_config_file(path, "select")


def test_malformed_file(tmp_path) -> None:
    path = tmp_path / "broken.toml"
    path.write_text("[select\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        read_config_file(path, "select")


def test_invalid_values_are_config_errors() -> None:
    with pytest.raises(ConfigError):
        resolve_config("benchmark", overrides={"reps": 1})
    with pytest.raises(ConfigError):
        resolve_config("benchmark", overrides={"methods": ["ww_frozen"]})
    with pytest.raises(ConfigError):
        resolve_config("estimate", overrides={"a": 1.0})


def test_sidecar_round_trip(tmp_path) -> None:
    out = tmp_path / "result.csv"
    original = resolve_config("trajectory", overrides={"density": "f2", "n_end": 300, "out": str(out)})
    path = write_sidecar("trajectory", original, out)
    assert path == sidecar_path(out)
    assert resolve_config("trajectory", path) == original


def test_sidecar_skipped_for_stdout() -> None:
    assert write_sidecar("select", resolve_config("select"), None) is None


def test_unknown_grid_keys_are_rejected(tmp_path) -> None:
    path = tmp_path / "typo.json"
    path.write_text(json.dumps({"benchmark": {"grid": {"sise": 12}}}), encoding="utf-8")
    with pytest.raises(ConfigError):
        resolve_config("benchmark", path)
    with pytest.raises(ConfigError):
        resolve_config("frozen", overrides={"grid": {"kind": "triangular"}})


def test_grid_kind_from_file(tmp_path) -> None:
    path = tmp_path / "run.toml"
    path.write_text('[frozen.grid]\nkind = "sqrt_log_gl"\n', encoding="utf-8")
    assert resolve_config("frozen", path).grid.kind == "sqrt_log_gl"
    assert resolve_config("benchmark").grid.kind is None
