import math

import numpy as np
import pytest
from scipy import integrate

from app.core.errors import InvalidArgumentError
from app.services.kernels import (
    KERNEL_NAMES,
    absolute_moment,
    convolve,
    evaluate,
    inner_product,
    kernel_by_name,
    make_kernel,
    make_standard,
    moment,
    norms,
    scale,
)


def test_standard_kernels_have_expected_components() -> None:
    assert make_standard(1).components == ((1.0, 1.0),)
    assert make_standard(3).components == ((2.0, 1.0), (-1.0, 2.0))
    assert make_standard(7).components == ((4.0, 1.0), (-6.0, 2.0), (4.0, 3.0), (-1.0, 4.0))


def test_unknown_kernel_is_rejected() -> None:
    with pytest.raises(InvalidArgumentError):
        make_standard(2)
    with pytest.raises(InvalidArgumentError):
        kernel_by_name("K9")


def test_make_kernel_merges_and_sorts() -> None:
    kernel = make_kernel([(0.5, 2.0), (1.0, 1.0), (0.5, 2.0), (0.0, 5.0)])
    assert kernel.components == ((1.0, 1.0), (1.0, 2.0))


def test_non_positive_variance_is_rejected() -> None:
    with pytest.raises(InvalidArgumentError):
        make_kernel([(1.0, 0.0)])


def test_scale(k1, k3) -> None:
    assert scale(k1, 1.0) == k1
    assert scale(k1, 0.5).components == ((1.0, 0.25),)
    assert scale(k3, 2.0).components == ((2.0, 4.0), (-1.0, 8.0))
    with pytest.raises(InvalidArgumentError):
        scale(k1, 0.0)


@pytest.mark.parametrize(
    ("name", "expected"),
    [("K1", 0.398942), ("K3", 0.515790), ("K7", 0.625046)],
)
def test_evaluate_at_zero(name: str, expected: float) -> None:
    assert float(evaluate(kernel_by_name(name), 0.0)) == pytest.approx(expected, abs=1e-6)


@pytest.mark.parametrize("name", KERNEL_NAMES)
def test_every_kernel_integrates_to_one(name: str) -> None:
    kernel = kernel_by_name(name)
    mass, _ = integrate.quad(lambda y: float(evaluate(kernel, y)), -40, 40, epsabs=1e-12)
    assert mass == pytest.approx(1.0, abs=1e-8)
    assert kernel.total_weight == pytest.approx(1.0, abs=1e-15)


@pytest.mark.parametrize("order", [3, 5, 7])
def test_moments_vanish_up_to_order(order: int) -> None:
    kernel = make_standard(order)
    for i in range(1, order + 1):
        assert moment(kernel, i) == 0.0
    assert moment(kernel, order + 1) != 0.0


def test_moment_examples(k1, k3, k7) -> None:
    assert moment(k3, 2) == 0.0
    assert moment(k7, 6) == 0.0
    assert moment(k1, 1) == 0.0
    assert moment(k1, 0) == 1.0
    assert moment(k1, 4) == 3.0


def test_inner_product_examples(k1) -> None:
    assert inner_product(k1, k1, 0.0) == pytest.approx(0.282095, abs=1e-6)
    h = 0.3
    assert inner_product(scale(k1, h), scale(k1, h), 0.0) == pytest.approx(
        1.0 / (2.0 * h * math.sqrt(math.pi)), rel=1e-12
    )
    assert inner_product(k1, k1, 50.0) < 1e-200


@pytest.mark.parametrize("name", ["K1", "K3", "K7"])
def test_inner_product_matches_quadrature(name: str) -> None:
    kernel = kernel_by_name(name)
    rng = np.random.default_rng(7)
    for h1, h2, offset in zip(
        rng.uniform(0.1, 1.0, 50), rng.uniform(0.1, 1.0, 50), rng.uniform(-2.0, 2.0, 50)
    ):
        ka, kb = scale(kernel, h1), scale(kernel, h2)
        expected, _ = integrate.quad(
            lambda y: float(evaluate(ka, offset - y) * evaluate(kb, -y)),
            -30, 30, epsabs=1e-13, epsrel=1e-12, limit=400,
        )
        assert inner_product(ka, kb, offset) == pytest.approx(expected, rel=1e-6, abs=1e-12)


def test_convolution_agrees_with_inner_product(k1, k3, k7) -> None:
    assert convolve(k1, k1).components == ((1.0, 2.0),)
    assert float(evaluate(convolve(k1, k1), 0.0)) == pytest.approx(0.282095, abs=1e-6)
    for ka, kb in [(k1, k3), (k3, k7), (scale(k7, 0.4), scale(k3, 0.9))]:
        for d in (-1.3, 0.0, 0.25, 2.0):
            assert float(evaluate(convolve(ka, kb), d)) == pytest.approx(
                inner_product(ka, kb, d), abs=1e-12
            )


def test_convolution_with_narrow_kernel_approaches_identity(k1, k3) -> None:
    narrow = convolve(k3, scale(k1, 1e-3))
    xs = np.linspace(-8, 8, 4001)
    diff = evaluate(narrow, xs) - evaluate(k3, xs)
    assert float(np.sum(diff**2) * (xs[1] - xs[0])) < 1e-10


def test_norms(k1, k3) -> None:
    constants = norms(k1)
    assert constants.l2_norm_sq == pytest.approx(0.282095, abs=1e-6)
    assert constants.l1_norm == pytest.approx(1.0, abs=1e-8)
    assert constants.sup_norm == pytest.approx(0.398942, abs=1e-6)

    xs = np.linspace(-20, 20, 400001)
    oracle = float(integrate.trapezoid(np.abs(evaluate(k3, xs)), xs))
    assert norms(k3).l1_norm > 1.0
    assert norms(k3).l1_norm == pytest.approx(oracle, rel=1e-6)
    assert norms(k3).sup_norm == pytest.approx(0.515790, abs=1e-6)


def test_absolute_moment(k1) -> None:
    # E|Z| for a standard normal
    assert absolute_moment(k1, 1.0) == pytest.approx(math.sqrt(2.0 / math.pi), rel=1e-7)
    assert absolute_moment(k1, 0.0) == pytest.approx(1.0, rel=1e-8)
    with pytest.raises(InvalidArgumentError):
        absolute_moment(k1, -1.0)


def _assert_same_kernel(ka, kb) -> None:
    assert len(ka.components) == len(kb.components)
    np.testing.assert_allclose(ka.weights, kb.weights, rtol=1e-14, atol=1e-15)
    np.testing.assert_allclose(ka.variances, kb.variances, rtol=1e-14)


def test_convolution_is_commutative_and_associative(k1, k3, k7) -> None:
    half = scale(k3, 0.5)
    for ka, kb in [(k1, k3), (k3, k7), (half, k7)]:
        _assert_same_kernel(convolve(ka, kb), convolve(kb, ka))
    _assert_same_kernel(convolve(convolve(k1, k3), k7), convolve(k1, convolve(k3, k7)))
    _assert_same_kernel(convolve(convolve(half, k7), k3), convolve(half, convolve(k7, k3)))


@pytest.mark.parametrize("name", KERNEL_NAMES)
def test_repeated_scaling_composes(name: str) -> None:
    kernel = kernel_by_name(name)
    for a, b in [(0.5, 0.5), (0.3, 0.7), (1.7, 0.2)]:
        _assert_same_kernel(scale(scale(kernel, a), b), scale(kernel, a * b))
