import io

import pytest

from app.core.errors import SampleParseError
from app.utils.sample_io import iter_observations, parse_line, read_sample, write_sample


def test_parse_line_skips_comments_and_blanks() -> None:
    assert parse_line("  1.5  ", 1) == 1.5
    assert parse_line("# header", 1) is None
    assert parse_line("   ", 2) is None
    assert parse_line("-2e-3 # trailing", 3) == -0.002


def test_parse_error_names_the_line() -> None:
    with pytest.raises(SampleParseError) as exc_info:
        list(iter_observations(io.StringIO("1.0\n# ok\nabc\n")))
    assert exc_info.value.line_number == 3
    assert str(exc_info.value).startswith("line 3:")


def test_non_finite_values_are_rejected() -> None:
    with pytest.raises(SampleParseError):
        parse_line("inf", 1)
    with pytest.raises(SampleParseError):
        parse_line("1e999", 1)


@pytest.mark.parametrize("text", ["1_000", "0x10", "1.5.2", "1,5", "--1", "1e"])
def test_only_plain_decimal_text_is_accepted(text: str) -> None:
    with pytest.raises(SampleParseError) as exc_info:
        list(iter_observations(io.StringIO(f"0.5\n{text}\n")))
    assert exc_info.value.line_number == 2


def test_decimal_forms() -> None:
    assert parse_line("+.5", 1) == 0.5
    assert parse_line("3.", 1) == 3.0
    assert parse_line("-1E+2", 1) == -100.0


def test_round_trip_keeps_exact_values(tmp_path) -> None:
    values = [0.1, -1 / 3, 1e-300, 123456.789]
    path = write_sample(values, tmp_path / "nested" / "s.txt")
    assert list(read_sample(path).observations) == values


def test_empty_file_is_a_parse_error(tmp_path) -> None:
    path = tmp_path / "empty.txt"
    path.write_text("# nothing here\n\n", encoding="utf-8")
    with pytest.raises(SampleParseError):
        read_sample(path)


def test_missing_file_raises_os_error(tmp_path) -> None:
    with pytest.raises(OSError):
        read_sample(tmp_path / "missing.txt")


def test_reads_standard_input(monkeypatch) -> None:
    monkeypatch.setattr("sys.stdin", io.StringIO("0.5\n1.5\n"))
    assert list(read_sample("-").observations) == [0.5, 1.5]
