"""Sample Text Format - 관측값 텍스트 읽기/쓰기

한 줄에 관측값 하나 (10진수 텍스트). ``#`` 이후는 주석이며 빈 줄은 무시합니다.
"""

import math
import re
import sys
from pathlib import Path
from typing import Iterable, Iterator, TextIO

from app.core.errors import SampleParseError
from app.services.estimator import Sample

DECIMAL = re.compile(r"[+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?")


def parse_line(line: str, line_number: int) -> float | None:
    """한 줄을 관측값으로 변환합니다.

    Returns:
        관측값, 또는 주석/빈 줄이면 None

    Raises:
        SampleParseError: 유한한 10진수가 아닌 경우
    """
    text = line.split("#", 1)[0].strip()
    if not text:
        return None
    if DECIMAL.fullmatch(text) is None:
        raise SampleParseError(f"not a decimal number: {text!r}", line_number)
    value = float(text)
    if not math.isfinite(value):
        raise SampleParseError(f"observation must be finite, got {text!r}", line_number)
    return value


def iter_observations(stream: TextIO) -> Iterator[float]:
    """스트림에서 관측값을 도착 순서대로 읽습니다 (stream 명령용)."""
    for line_number, line in enumerate(stream, start=1):
        value = parse_line(line, line_number)
        if value is not None:
            yield value


def open_input(path: str | Path | None) -> TextIO:
    """``None`` 또는 ``"-"`` 이면 표준 입력"""
    if path is None or str(path) == "-":
        return sys.stdin
    return open(path, encoding="utf-8")


def read_sample(path: str | Path | None) -> Sample:
    """샘플 파일 전체를 읽습니다.

    Raises:
        OSError: 파일을 읽을 수 없는 경우
        SampleParseError: 잘못된 줄이 있거나 관측값이 하나도 없는 경우
    """
    handle = open_input(path)
    try:
        values = list(iter_observations(handle))
    finally:
        if handle is not sys.stdin:
            handle.close()
    if not values:
        raise SampleParseError(f"no observations in {path or 'standard input'}")
    return Sample.of(values)


def write_sample(observations: Iterable[float], path: str | Path) -> Path:
    """관측값을 한 줄에 하나씩 저장 (round-trip 가능한 repr 형식)"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as handle:
        for value in observations:
            handle.write(f"{float(value)!r}\n")
    return path
