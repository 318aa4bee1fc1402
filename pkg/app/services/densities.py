"""Density service: 시뮬레이션용 시험 밀도와 시드 고정 표본 추출.

    f1   N(0, 1)
    fm1  0.5 N(-2, 1) + 0.5 N(2, 1)
    f2   Beta(3, 3)
    fm2  0.5 (Beta(3, 3) - 1) + 0.5 Beta(3, 3)
    f3   Gamma(shape 5, scale 5) / 10
    fm3  0.4 Gamma(shape 2, scale 1/3) + 0.6 Gamma(shape 7, scale 6) / 10
    f4   Laplace, (1/2) exp(-|x|)

Gamma 분포는 shape-scale 모수화를 쓰고, Laplace 는 정규화된 밀도입니다.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate, stats

from app.core.errors import InvalidArgumentError, NumericError
from app.services.estimator import Sample

logger = logging.getLogger(__name__)

MASS_TOLERANCE = 1e-6
DENSITY_NAMES = ("f1", "fm1", "f2", "fm2", "f3", "fm3", "f4")


@dataclass(frozen=True, slots=True)
class SeededStream:
    """Reproducible random stream; distinct ``stream_id`` values are independent."""

    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        sequence = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id,))
        return np.random.Generator(np.random.PCG64(sequence))


@dataclass(frozen=True, slots=True)
class DensityComponent:
    """``weight * law(a * Y + b)`` for a base law Y of the given family."""

    weight: float
    family: str
    params: tuple[float, ...]
    a: float = 1.0
    b: float = 0.0

    def law(self):
        if self.family == "normal":
            mean, sd = self.params
            return stats.norm(loc=self.a * mean + self.b, scale=self.a * sd)
        if self.family == "beta":
            alpha, beta = self.params
            return stats.beta(alpha, beta, loc=self.b, scale=self.a)
        if self.family == "gamma":
            shape, scale = self.params
            return stats.gamma(shape, loc=self.b, scale=self.a * scale)
        if self.family == "laplace":
            (scale,) = self.params
            return stats.laplace(loc=self.b, scale=self.a * scale)
        raise InvalidArgumentError(f"unknown family {self.family!r}")

    def draw(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if self.family == "normal":
            mean, sd = self.params
            base = rng.normal(mean, sd, size=size)
        elif self.family == "beta":
            base = rng.beta(*self.params, size=size)
        elif self.family == "gamma":
            shape, scale = self.params
            base = rng.gamma(shape, scale, size=size)
        elif self.family == "laplace":
            (scale,) = self.params
            # inverse CDF
            u = rng.uniform(-0.5, 0.5, size=size)
            base = -scale * np.sign(u) * np.log1p(-2.0 * np.abs(u))
        else:
            raise InvalidArgumentError(f"unknown family {self.family!r}")
        return self.a * base + self.b


@dataclass(frozen=True, slots=True)
class DensityModel:
    name: str
    components: tuple[DensityComponent, ...]
    support: tuple[float, float]

    def __post_init__(self) -> None:
        weights = [c.weight for c in self.components]
        if any(w <= 0 for w in weights) or not math.isclose(math.fsum(weights), 1.0):
            raise InvalidArgumentError(f"{self.name}: weights must be positive and sum to 1")
        mass = self.mass()
        if abs(mass - 1.0) > MASS_TOLERANCE:
            raise NumericError(f"{self.name}: density does not integrate to 1", {"mass": mass})

    @property
    def weights(self) -> np.ndarray:
        return np.array([c.weight for c in self.components])

    def mass(self) -> float:
        lower, upper = self.support
        breaks = sorted(
            {float(p) for c in self.components for p in c.law().support()}
            | {float(c.law().median()) for c in self.components}
        )
        inner = [p for p in breaks if lower < p < upper and math.isfinite(p)]
        edges = [lower, *inner, upper]
        return math.fsum(
            integrate.quad(lambda x: float(density_eval(self, x)), lo, hi, limit=200)[0]
            for lo, hi in zip(edges, edges[1:])
        )


def density_eval(model: DensityModel, x: np.ndarray | float) -> np.ndarray:
    """정확한 밀도 값 (지지 집합 밖은 0)"""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    for component in model.components:
        out = out + component.weight * component.law().pdf(x)
    return out


def density_cdf(model: DensityModel, x: np.ndarray | float) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    for component in model.components:
        out = out + component.weight * component.law().cdf(x)
    return out


def density_sample(model: DensityModel, stream: SeededStream, n: int) -> Sample:
    """``n`` 개 표본 추출: 먼저 관측치별 성분 번호를 뽑고, 성분 순서대로 값을 뽑습니다.

    Args:
        model: 밀도 모델
        stream: 시드 고정 난수 스트림
        n: 표본 크기

    Returns:
        Sample

    Raises:
        InvalidArgumentError: n < 1
    """
    if n < 1:
        raise InvalidArgumentError(f"n must be >= 1, got {n}")
    rng = stream.generator()
    if len(model.components) == 1:
        return Sample(model.components[0].draw(rng, n))
    labels = rng.choice(len(model.components), size=n, p=model.weights)
    out = np.empty(n)
    for index, component in enumerate(model.components):
        mask = labels == index
        out[mask] = component.draw(rng, int(mask.sum()))
    return Sample(out)


def _build(name: str) -> DensityModel:
    if name == "f1":
        return DensityModel(name, (DensityComponent(1.0, "normal", (0.0, 1.0)),), (-math.inf, math.inf))
    if name == "fm1":
        return DensityModel(
            name,
            (
                DensityComponent(0.5, "normal", (-2.0, 1.0)),
                DensityComponent(0.5, "normal", (2.0, 1.0)),
            ),
            (-math.inf, math.inf),
        )
    if name == "f2":
        return DensityModel(name, (DensityComponent(1.0, "beta", (3.0, 3.0)),), (0.0, 1.0))
    if name == "fm2":
        return DensityModel(
            name,
            (
                DensityComponent(0.5, "beta", (3.0, 3.0), b=-1.0),
                DensityComponent(0.5, "beta", (3.0, 3.0)),
            ),
            (-1.0, 1.0),
        )
    if name == "f3":
        return DensityModel(
            name, (DensityComponent(1.0, "gamma", (5.0, 5.0), a=0.1),), (0.0, math.inf)
        )
    if name == "fm3":
        return DensityModel(
            name,
            (
                DensityComponent(0.4, "gamma", (2.0, 1.0 / 3.0)),
                DensityComponent(0.6, "gamma", (7.0, 6.0), a=0.1),
            ),
            (0.0, math.inf),
        )
    if name == "f4":
        return DensityModel(name, (DensityComponent(1.0, "laplace", (1.0,)),), (-math.inf, math.inf))
    raise InvalidArgumentError(
        f"unknown density {name!r}; expected one of {', '.join(DENSITY_NAMES)}"
    )


@lru_cache(maxsize=None)
def density_by_name(name: str) -> DensityModel:
    """Resolve a density by name; the mass check runs once per name."""
    return _build(name.strip().lower())
