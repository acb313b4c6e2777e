import cmath
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from rigidpacket.errors import DomainError, NoDampingError, QuadratureFailure, SeriesRangeError
from rigidpacket.specfun import (
    ComplexOrder,
    QuadratureSpec,
    bessel_k,
    bessel_k_with_error,
    rapidity_contour,
    rapidity_integral,
    struve_l,
)

orders = st.builds(complex, st.sampled_from([-0.5, 0.5]), st.floats(-50, 50))
args = st.builds(
    lambda r, th: cmath.rect(r, th),
    st.floats(1e-2, 60),
    st.floats(-math.pi / 2 + 1e-3, math.pi / 2 - 1e-3),
)


def test_half_order_closed_form():
    assert bessel_k(ComplexOrder(0.5, 0), 1.0) == pytest.approx(0.4610685, rel=1e-7)
    for z in np.linspace(0.1, 50, 25):
        exact = math.sqrt(math.pi / (2 * z)) * math.exp(-z)
        assert abs(bessel_k(0.5, z) - exact) <= 1e-10 * exact


def test_trapezoid_oracle():
    nu, z = complex(0.5, 2.0), complex(1, 0.5)
    t = np.linspace(-40, 40, 400001)
    f = np.exp(-z * np.cosh(t) + nu * t)
    # the integrand decays double-exponentially, so the trapezoid rule is spectrally accurate
    oracle = 0.5 * np.trapezoid(f, t)
    assert abs(bessel_k(nu, z) - oracle) <= 1e-8 * abs(oracle)


@pytest.mark.parametrize("seed", range(3))
def test_against_mpmath(seed):
    rng = np.random.default_rng(seed)
    for _ in range(10):
        nu = complex(rng.choice([-0.5, 0.5]), rng.uniform(-50, 50))
        z = cmath.rect(10 ** rng.uniform(-3, 2), rng.uniform(-1.5, 1.5))
        ref = complex(mpmath.besselk(nu, z))
        assert abs(bessel_k(nu, z) - ref) <= 1e-10 * abs(ref)


@given(orders, args)
def test_order_symmetry(nu, z):
    a, b = bessel_k(nu, z), bessel_k(-nu, z)
    assert abs(a - b) <= 1e-10 * abs(a)


@given(orders, args)
def test_schwarz_reflection(nu, z):
    a = bessel_k(nu, z).conjugate()
    b = bessel_k(nu.conjugate(), z.conjugate())
    assert abs(a - b) <= 1e-10 * abs(a)


@given(st.floats(-50, 50), st.floats(-1.0, 1.0), args)
def test_recurrence(im, re, z):
    nu = complex(re, im)
    lhs = bessel_k(nu - 1, z) - bessel_k(nu + 1, z)
    rhs = -(2 * nu / z) * bessel_k(nu, z)
    scale = max(abs(bessel_k(nu - 1, z)), abs(bessel_k(nu + 1, z)))
    assert abs(lhs - rhs) <= 1e-9 * scale


def test_refinement_within_error_estimate():
    nu, z = complex(0.5, 30), complex(2, 1)
    m1, s1, e1 = bessel_k_with_error(nu, z, QuadratureSpec(max_subdivisions=64))
    m2, s2, _ = bessel_k_with_error(nu, z, QuadratureSpec(max_subdivisions=128))
    assert abs(m1 * cmath.exp(s1) - m2 * cmath.exp(s2)) <= max(e1 * math.exp(s1), 1e-15 * abs(m2 * cmath.exp(s2)))


def test_domain_errors():
    with pytest.raises(DomainError):
        bessel_k(0.5, 0)
    with pytest.raises(DomainError):
        bessel_k(0.5, -1.0)


def test_quadrature_failure_carries_estimate():
    spec = QuadratureSpec(rel_tol=1e-30, max_subdivisions=2)
    with pytest.raises(QuadratureFailure) as info:
        bessel_k(complex(0.5, 40), 0.01, spec)
    assert info.value.error_estimate >= 0


def test_imaginary_axis_limit():
    z = 3j + 1e-15
    assert abs(bessel_k(0.5, z) - complex(mpmath.besselk(0.5, 3j))) < 1e-10


def test_struve_values():
    assert struve_l(0, 0.0) == 0.0
    assert struve_l(-1, 0.0) == pytest.approx(2 / math.pi, rel=1e-15)
    ref, _ = quad(lambda th: math.sinh(2 * math.cos(th)), 0, math.pi / 2, epsabs=0, epsrel=1e-13)
    assert struve_l(0, 2.0) == pytest.approx(2 / math.pi * ref, rel=1e-10)


@given(st.floats(0, 60), st.sampled_from([0, -1]))
def test_struve_mpmath(x, order):
    ref = float(mpmath.struvel(order, x))
    assert struve_l(order, x) == pytest.approx(ref, rel=1e-12, abs=1e-300)


def test_struve_range():
    with pytest.raises(SeriesRangeError):
        struve_l(0, 700.0)
    with pytest.raises(DomainError):
        struve_l(0, -1.0)


def _free_weight(b):
    b = np.asarray(b)
    # boosted rest spinor (e^{-b/2}, 0, e^{b/2}, 0)
    return np.stack([np.exp(-b / 2), 0 * b, np.exp(b / 2), 0 * b], axis=-1)


def test_rapidity_integral_half_order():
    # α = 0, ā = 1 at the origin: ∫ e^{∓b/2} e^{-cosh b} db = 2 K_{1/2}(1)
    contour = rapidity_contour(0.0, 1.0, 0.0, 0.0)
    val, err = rapidity_integral(_free_weight, lambda b: -np.cosh(b), contour, abar=1.0)
    k = math.sqrt(math.pi / 2) * math.exp(-1)
    np.testing.assert_allclose(val, [2 * k, 0, 2 * k, 0], rtol=1e-10, atol=1e-14)
    assert err < 1e-9


def test_rapidity_integral_refuses_without_damping():
    with pytest.raises(NoDampingError):
        rapidity_contour(30, 0.0, 1.0, 35.0)
    with pytest.raises(NoDampingError):
        rapidity_integral(_free_weight, lambda b: -np.cosh(b), None, abar=0.0)
