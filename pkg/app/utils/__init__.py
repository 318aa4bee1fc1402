"""Utility Functions - 샘플 파일, 결과 파일, 실행 설정 입출력"""

from app.utils.sample_io import read_sample, write_sample
from app.utils.writers import emit, render_csv, render_json

__all__ = [
    "read_sample",
    "write_sample",
    "emit",
    "render_csv",
    "render_json",
]
