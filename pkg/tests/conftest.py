"""Pytest Configuration and Fixtures"""

from pathlib import Path
from typing import Callable

import pytest

from app.schemas.experiment import GridParams
from app.services.densities import SeededStream, density_by_name, density_sample
from app.services.estimator import Sample
from app.services.kernels import GaussianMixtureKernel, kernel_by_name
from app.utils.sample_io import write_sample


@pytest.fixture
def k1() -> GaussianMixtureKernel:
    return kernel_by_name("K1")


@pytest.fixture
def k3() -> GaussianMixtureKernel:
    return kernel_by_name("K3")


@pytest.fixture
def k7() -> GaussianMixtureKernel:
    return kernel_by_name("K7")


@pytest.fixture
def f1_sample() -> Sample:
    """Seeded N(0, 1) sample, n = 200"""
    return density_sample(density_by_name("f1"), SeededStream(1234), 200)


@pytest.fixture
def small_grid() -> GridParams:
    """Coarse grid settings that keep Monte-Carlo tests fast."""
    return GridParams(size=8, gamma_max=0.5, selection_points=80, eval_points=50)


@pytest.fixture
def sample_file(tmp_path: Path) -> Callable[..., Path]:
    """관측값 목록을 샘플 파일로 저장하는 헬퍼"""

    def _write(values, name: str = "sample.txt") -> Path:
        return write_sample(values, tmp_path / name)

    return _write
