"""Special-function layer: values against quadrature oracles, flags, domains."""

import math

import pytest

from scalegp.specfun import (OK, OVERFLOW, UNDERFLOW_TO_ZERO, SpecFunResult,
                             bessel_k, gamma, inv_norm_cdf)

from _oracles import bessel_k_quad, gamma_quad, norm_cdf


def test_gamma_known_values():
    assert gamma(1.0) == 1.0
    assert gamma(5.0) == pytest.approx(24.0, rel=1e-14)
    assert gamma(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-14)


def test_gamma_recurrence():
    # Gamma(x+1) = x Gamma(x), spot-checked off the half-integer lattice.
    for x in (0.3, 0.7, 1.9, 3.14, 7.25, 20.5):
        assert gamma(x + 1.0) == pytest.approx(x * gamma(x), rel=1e-13)


def test_gamma_against_quadrature_oracle():
    for x in (0.1, 0.35, 0.5, 1.0, 1.5, 2.5, 4.2, 10.0, 25.0, 50.0):
        assert gamma(x) == pytest.approx(gamma_quad(x), rel=1e-13)


def test_gamma_overflow_returns_inf():
    assert math.isinf(gamma(200.0))


def test_gamma_domain_errors():
    with pytest.raises(ValueError):
        gamma(0.0)
    with pytest.raises(ValueError):
        gamma(-1.5)
    with pytest.raises(ValueError):
        gamma(math.nan)
    with pytest.raises(ValueError):
        gamma(math.inf)


def test_bessel_k_against_quadrature_oracle():
    for nu in (0.5, 1.0, 1.5, 2.5, 3.7, 9.5):
        for x in (0.01, 0.1, 1.0, 3.0, 10.0):
            res = bessel_k(nu, x)
            assert isinstance(res, SpecFunResult)
            assert res.flags == OK
            assert res.value == pytest.approx(bessel_k_quad(nu, x), rel=1e-10)


def test_bessel_k_half_integer_closed_form():
    # K_{1/2}(x) = sqrt(pi/(2x)) e^-x.
    for x in (0.2, 1.0, 5.0):
        expected = math.sqrt(math.pi / (2.0 * x)) * math.exp(-x)
        assert bessel_k(0.5, x).value == pytest.approx(expected, rel=1e-14)


def test_bessel_k_underflow_flag():
    res = bessel_k(1.0, 800.0)
    assert res.value == 0.0
    assert res.flags == UNDERFLOW_TO_ZERO


def test_bessel_k_overflow_flag():
    # K_nu(x) ~ Gamma(nu)/2 (2/x)^nu blows past float64 for small x, big nu.
    res = bessel_k(180.0, 1e-2)
    assert math.isinf(res.value)
    assert res.flags == OVERFLOW


def test_bessel_k_domain_errors():
    with pytest.raises(ValueError):
        bessel_k(0.0, 1.0)
    with pytest.raises(ValueError):
        bessel_k(1.0, 0.0)
    with pytest.raises(ValueError):
        bessel_k(1.0, -2.0)
    with pytest.raises(ValueError):
        bessel_k(math.inf, 1.0)


def test_inv_norm_cdf_round_trip():
    # Residual |F(F^-1(p)) - p| pinned against the erf-based CDF.
    for p in (1e-9, 0.025, 0.1, 0.5, 0.9, 0.975, 1.0 - 1e-9):
        assert abs(norm_cdf(inv_norm_cdf(p)) - p) <= 1e-12


def test_inv_norm_cdf_symmetry_and_median():
    assert inv_norm_cdf(0.5) == 0.0
    for p in (0.01, 0.2, 0.4):
        assert inv_norm_cdf(p) == pytest.approx(-inv_norm_cdf(1.0 - p), abs=1e-12)


def test_inv_norm_cdf_two_sided_width():
    assert inv_norm_cdf(0.975) == pytest.approx(1.959963984540054, abs=1e-12)


def test_inv_norm_cdf_domain_errors():
    for p in (0.0, 1.0, -0.1, 1.1, math.nan):
        with pytest.raises(ValueError):
            inv_norm_cdf(p)
