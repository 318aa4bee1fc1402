"""Kernel service: 가우시안 혼합 커널 (K1..K7) 의 스케일, 합성곱, 내적, 노름.

커널은 ``(weight, variance)`` 쌍의 정규형으로 저장되며 다음 연산이 닫힌 형태입니다:

- ``scale``: variance ``v`` becomes ``v * h**2``
- ``convolve``: ``phi_u * phi_v = phi_{u+v}``
- ``inner_product``: ``<phi_u(a - .), phi_v(b - .)> = phi_{u+v}(a - b)``

L1 노름과 sup 노름만 수치 계산이 필요합니다.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable

import numpy as np
from scipy import integrate, optimize
from scipy.special import factorial2

from app.core.config import settings
from app.core.errors import InvalidArgumentError, NumericError

logger = logging.getLogger(__name__)

SQRT_2PI = math.sqrt(2.0 * math.pi)
QUAD_HALF_WIDTH_SD = 20.0

# K1 = n1, K3 = 2n1 - n2, K5 = 3n1 - 3n2 + n3, K7 = 4n1 - 6n2 + 4n3 - n4
_STANDARD_WEIGHTS: dict[int, tuple[float, ...]] = {
    1: (1.0,),
    3: (2.0, -1.0),
    5: (3.0, -3.0, 1.0),
    7: (4.0, -6.0, 4.0, -1.0),
}
KERNEL_NAMES = tuple(f"K{order}" for order in _STANDARD_WEIGHTS)


def gaussian_density(x: np.ndarray | float, variance: np.ndarray | float) -> np.ndarray:
    """Centered Gaussian density with the given variance, broadcast elementwise."""
    x = np.asarray(x, dtype=float)
    variance = np.asarray(variance, dtype=float)
    return np.exp(-0.5 * x * x / variance) / (SQRT_2PI * np.sqrt(variance))


@dataclass(frozen=True, slots=True)
class GaussianMixtureKernel:
    """Signed mixture ``sum_j w_j * phi_{v_j}``.

    Build instances through :func:`make_kernel` (or the operations of this
    module) so that the component list is canonical: sorted by variance with
    equal variances merged. Equality is equality of canonical forms.
    """

    components: tuple[tuple[float, float], ...]
    order: int | None = None

    def __post_init__(self) -> None:
        if not self.components:
            raise InvalidArgumentError("kernel needs at least one component")
        for weight, variance in self.components:
            if not (math.isfinite(weight) and math.isfinite(variance)):
                raise InvalidArgumentError("kernel components must be finite")
            if variance <= 0.0:
                raise InvalidArgumentError(
                    f"component variance must be positive, got {variance}"
                )

    @property
    def weights(self) -> np.ndarray:
        return np.array([w for w, _ in self.components], dtype=float)

    @property
    def variances(self) -> np.ndarray:
        return np.array([v for _, v in self.components], dtype=float)

    @property
    def total_weight(self) -> float:
        return math.fsum(w for w, _ in self.components)

    @property
    def max_sd(self) -> float:
        return math.sqrt(max(v for _, v in self.components))

    @property
    def name(self) -> str:
        return f"K{self.order}" if self.order is not None else "custom"

    def __call__(self, x: np.ndarray | float) -> np.ndarray:
        return evaluate(self, x)


@dataclass(frozen=True, slots=True)
class KernelConstants:
    """Norms and order of a kernel, as they enter the selection penalties."""

    l2_norm_sq: float
    l1_norm: float
    sup_norm: float
    order: int | None


def make_kernel(
    components: Iterable[tuple[float, float]], order: int | None = None
) -> GaussianMixtureKernel:
    """Return the canonical kernel for an arbitrary component list."""
    merged: dict[float, float] = {}
    for weight, variance in components:
        variance = float(variance)
        merged[variance] = merged.get(variance, 0.0) + float(weight)
    canonical = tuple(
        (weight, variance)
        for variance, weight in sorted(merged.items())
        if weight != 0.0
    )
    if not canonical:
        raise InvalidArgumentError("kernel components cancel out completely")
    return GaussianMixtureKernel(components=canonical, order=order)


def make_standard(order: int) -> GaussianMixtureKernel:
    """1, 3, 5, 7 차 가우시안형 커널 생성 (전체 질량 1)

    Args:
        order: 커널 차수

    Returns:
        정규형 GaussianMixtureKernel

    Raises:
        InvalidArgumentError: 지원하지 않는 차수
    """
    weights = _STANDARD_WEIGHTS.get(order)
    if weights is None:
        raise InvalidArgumentError(
            f"unsupported kernel order {order}; expected one of {sorted(_STANDARD_WEIGHTS)}"
        )
    return make_kernel(
        ((w, float(j)) for j, w in enumerate(weights, start=1)), order=order
    )


def kernel_by_name(name: str) -> GaussianMixtureKernel:
    """Resolve ``"K1"``, ``"K3"``, ``"K5"`` or ``"K7"`` (case-insensitive)."""
    key = name.strip().upper()
    if key not in KERNEL_NAMES:
        raise InvalidArgumentError(
            f"unknown kernel {name!r}; expected one of {', '.join(KERNEL_NAMES)}"
        )
    return make_standard(int(key[1:]))


def scale(kernel: GaussianMixtureKernel, h: float) -> GaussianMixtureKernel:
    """``K_h = (1/h) K(./h)``: 모든 분산에 ``h**2`` 를 곱합니다.

    Args:
        kernel: 원래 커널
        h: 양의 대역폭

    Returns:
        스케일된 커널 (차수 유지)

    Raises:
        InvalidArgumentError: h <= 0
    """
    if not h > 0.0:
        raise InvalidArgumentError(f"bandwidth must be positive, got {h}")
    h_sq = float(h) * float(h)
    return make_kernel(
        ((w, v * h_sq) for w, v in kernel.components), order=kernel.order
    )


def evaluate(kernel: GaussianMixtureKernel, x: np.ndarray | float) -> np.ndarray:
    """``sum_j w_j phi_{v_j}(x)`` for scalar or array ``x``."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    for weight, variance in kernel.components:
        out = out + weight * gaussian_density(x, variance)
    return out


def inner_product(
    ka: GaussianMixtureKernel, kb: GaussianMixtureKernel, offset: float = 0.0
) -> float:
    """``<Ka(a - .), Kb(b - .)>_2`` 폐쇄형 계산

    Args:
        ka: 첫 번째 커널
        kb: 두 번째 커널
        offset: ``a - b``

    Returns:
        L2 내적 값
    """
    total = 0.0
    for wa, va in ka.components:
        for wb, vb in kb.components:
            total += wa * wb * float(gaussian_density(offset, va + vb))
    return total


def convolve(ka: GaussianMixtureKernel, kb: GaussianMixtureKernel) -> GaussianMixtureKernel:
    """``Ka * Kb``: pairwise variance sums with weight products."""
    return make_kernel(
        (wa * wb, va + vb) for wa, va in ka.components for wb, vb in kb.components
    )


def moment(kernel: GaussianMixtureKernel, i: int) -> float:
    """Exact ``int y**i K(y) dy``.

    Odd moments vanish; the 2m-th moment of ``phi_v`` is ``(2m-1)!! v**m``.
    """
    if i < 0:
        raise InvalidArgumentError(f"moment index must be nonnegative, got {i}")
    if i % 2 == 1:
        return 0.0
    m = i // 2
    weighted = math.fsum(w * v**m for w, v in kernel.components)
    if m == 0:
        return weighted
    return float(factorial2(2 * m - 1, exact=True)) * weighted


def _quad(func, lower: float, upper: float, tol: float, what: str) -> float:
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            value, abserr = integrate.quad(
                func, lower, upper, epsabs=tol, epsrel=tol, limit=500, points=[0.0]
            )
        except integrate.IntegrationWarning as exc:
            raise NumericError(
                f"quadrature for {what} did not converge",
                {"lower": lower, "upper": upper, "tolerance": tol, "reason": str(exc)},
            ) from exc
    if abserr > 10 * tol:
        raise NumericError(
            f"quadrature for {what} exceeded tolerance",
            {"abserr": abserr, "tolerance": tol},
        )
    return float(value)


def _quad_range(kernel: GaussianMixtureKernel) -> tuple[float, float]:
    half_width = QUAD_HALF_WIDTH_SD * kernel.max_sd
    return -half_width, half_width


def l1_norm(kernel: GaussianMixtureKernel, tol: float | None = None) -> float:
    tol = settings.QUAD_TOL if tol is None else tol
    lower, upper = _quad_range(kernel)
    return _quad(lambda y: abs(float(evaluate(kernel, y))), lower, upper, tol, "||K||_1")


def sup_norm(kernel: GaussianMixtureKernel) -> float:
    """``||K||_inf`` by grid search refined with a bounded scalar minimisation."""
    lower, upper = _quad_range(kernel)
    grid = np.linspace(lower, upper, 40001)
    values = np.abs(evaluate(kernel, grid))
    best = int(np.argmax(values))
    step = grid[1] - grid[0]
    refined = optimize.minimize_scalar(
        lambda y: -abs(float(evaluate(kernel, y))),
        bounds=(grid[best] - step, grid[best] + step),
        method="bounded",
        options={"xatol": 1e-12},
    )
    return float(max(values[best], -refined.fun))


def absolute_moment(kernel: GaussianMixtureKernel, beta: float, tol: float | None = None) -> float:
    """``C_beta(K) = int |z|**beta |K(z)| dz`` 수치 적분

    Raises:
        InvalidArgumentError: beta < 0
        NumericError: 적분이 허용 오차 안에 수렴하지 않을 때
    """
    if beta < 0:
        raise InvalidArgumentError(f"beta must be nonnegative, got {beta}")
    tol = settings.QUAD_TOL if tol is None else tol
    lower, upper = _quad_range(kernel)
    return _quad(
        lambda z: abs(z) ** beta * abs(float(evaluate(kernel, z))),
        lower,
        upper,
        tol,
        f"C_{beta}(K)",
    )


@lru_cache(maxsize=64)
def norms(kernel: GaussianMixtureKernel) -> KernelConstants:
    """선택 페널티에 쓰이는 커널 상수 (L2 제곱, L1, sup, 차수)

    Args:
        kernel: 대상 커널

    Returns:
        KernelConstants (커널별 캐시)

    Raises:
        NumericError: L1 적분 실패
    """
    constants = KernelConstants(
        l2_norm_sq=inner_product(kernel, kernel, 0.0),
        l1_norm=l1_norm(kernel),
        sup_norm=sup_norm(kernel),
        order=kernel.order,
    )
    logger.debug("Computed norms for %s: %s", kernel.name, constants)
    return constants
