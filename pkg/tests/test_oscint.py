"""Tests for the oscillatory quadrature layer."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cylwave.oscint import (DegenerateCriticalPointError, OscQuadError,
                            Phase1D, integrate_osc, stationary_phase_1d)


def brute_force(amp, phase, lam, a, b, n=200_000):
    """High-order composite Gauss oracle, independent of the panel rules."""
    xg, wg = np.polynomial.legendre.leggauss(10)
    edges = np.linspace(a, b, n // 10 + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])[:, None]
    half = 0.5 * (edges[1] - edges[0])
    xs = (mid + half * xg[None, :]).ravel()
    fv = np.array([amp(x) for x in xs]) * np.exp(1j * lam * np.array([phase(x) for x in xs]))
    return half * np.dot(np.tile(wg, n // 10), fv)


def test_full_periods_linear_phase():
    lam = 40.0
    phase = Phase1D(eval=lambda x: x, d1=lambda x: 1.0, d2=lambda x: 0.0)
    out = integrate_osc(lambda x: 1.0, phase, lam, (0.0, 6 * 2 * math.pi / lam), tol=1e-12)
    assert abs(out.value) < 1e-12


def test_fresnel_closed_form():
    # windowed Gaussian-phase integral: ∫ e^{i lam x^2/2} dx ~ sqrt(2 pi/lam) e^{i pi/4}
    lam = 1.0e3
    phase = Phase1D(eval=lambda x: 0.5 * x * x, d1=lambda x: x, d2=lambda x: 1.0)
    half_width = 60.0 / math.sqrt(lam)

    # endpoint contributions killed by a smooth even window equal to 1 near 0
    def win(x):
        t = abs(x) / half_width
        if t >= 1.0:
            return 0.0
        if t <= 0.25:
            return 1.0
        u = (t - 0.25) / 0.75
        return 1.0 - u ** 3 * (10 - 15 * u + 6 * u * u)

    out = integrate_osc(win, phase, lam, (-half_width, half_width), tol=1e-9)
    expected = math.sqrt(2 * math.pi / lam) * np.exp(1j * math.pi / 4)
    assert abs(out.value / expected - 1.0) < 1e-6


def test_against_brute_force_lam50():
    lam = 50.0
    phase = Phase1D(eval=lambda x: x + 0.3 * math.sin(2 * x))
    amp = lambda x: 1.0 / (1.0 + x * x)
    got = integrate_osc(amp, phase, lam, (-2.0, 3.0), tol=1e-9)
    ref = brute_force(amp, phase.eval, lam, -2.0, 3.0)
    assert abs(got.value - ref) < max(1e-8, got.err_estimate + 1e-9)


def test_linearity_in_amplitude():
    lam = 120.0
    phase = Phase1D(eval=lambda x: x * x * 0.5 + x)
    a1 = lambda x: math.cos(x)
    a2 = lambda x: 1.0 / (2.0 + x)
    c1, c2 = 0.7 - 0.2j, -1.3 + 0.5j
    comb = lambda x: c1 * a1(x) + c2 * a2(x)
    v1 = integrate_osc(a1, phase, lam, (0.0, 2.0), tol=1e-11).value
    v2 = integrate_osc(a2, phase, lam, (0.0, 2.0), tol=1e-11).value
    vc = integrate_osc(comb, phase, lam, (0.0, 2.0), tol=1e-11).value
    assert abs(vc - (c1 * v1 + c2 * v2)) < 1e-9


def test_conjugation_symmetry():
    lam = 80.0
    phase = Phase1D(eval=lambda x: x + 0.1 * x ** 3)
    amp = lambda x: (1.0 + 0.5j) * math.exp(-x * x)
    plus = integrate_osc(amp, phase, lam, (-1.5, 1.5), tol=1e-11).value
    neg_phase = Phase1D(eval=lambda x: -(x + 0.1 * x ** 3))
    minus = integrate_osc(lambda x: np.conj(amp(x)), neg_phase, lam, (-1.5, 1.5), tol=1e-11).value
    assert abs(minus - np.conj(plus)) < 1e-9


def test_stationary_phase_quadratic_exact():
    lam = 100.0
    phase = Phase1D(eval=lambda x: 0.5 * x * x, d1=lambda x: x, d2=lambda x: 1.0)
    got = stationary_phase_1d(lambda x: 1.0, phase, 0.0, lam)
    expected = math.sqrt(2 * math.pi / lam) * np.exp(1j * math.pi / 4)
    assert abs(got - expected) < 1e-12


def test_stationary_phase_vs_quadrature_reduction():
    # stationary point of z -> z*g + sqrt(1+z^2) sits at z = -g/sqrt(1-g^2)
    # with critical value sqrt(1-g^2)
    g = 0.4
    zc = -g / math.sqrt(1 - g * g)
    phase = Phase1D(eval=lambda z: z * g + math.sqrt(1 + z * z))
    assert abs(phase.eval(zc) - math.sqrt(1 - g * g)) < 1e-14
    assert abs(phase.deriv1(zc)) < 1e-9
    lam = 1.0e3

    def win(z):
        t = abs(z - zc) / 3.0
        if t >= 1.0:
            return 0.0
        if t <= 0.3:
            return 1.0
        u = (t - 0.3) / 0.7
        return 1.0 - u ** 3 * (10 - 15 * u + 6 * u * u)

    spa = stationary_phase_1d(win, phase, zc, lam)
    quad = integrate_osc(win, phase, lam, (zc - 3.0, zc + 3.0), tol=1e-9)
    assert abs(spa / quad.value - 1.0) < 0.01


def test_stationary_phase_error_decays_like_inverse_lam():
    phase = Phase1D(eval=lambda x: 0.5 * x * x + 0.05 * x ** 3)
    amp = lambda x: math.exp(-0.5 * x * x)
    errs = []
    for lam in [1e2, 1e3, 1e4]:
        spa = stationary_phase_1d(amp, phase, 0.0, lam)
        ref = integrate_osc(amp, phase, lam, (-8.0, 8.0), tol=1e-10).value
        errs.append(abs(spa / ref - 1.0))
    order = math.log(errs[0] / errs[2]) / math.log(100.0)
    assert order > 0.85


def test_degenerate_critical_point_raises():
    phase = Phase1D(eval=lambda x: x ** 3 / 3.0, d1=lambda x: x * x, d2=lambda x: 2 * x)
    with pytest.raises(DegenerateCriticalPointError):
        stationary_phase_1d(lambda x: 1.0, phase, 0.0, 50.0)


def test_fd_derivative_fallback():
    phase = Phase1D(eval=lambda x: math.sin(x))
    assert abs(phase.deriv1(0.3) - math.cos(0.3)) < 1e-8
    assert abs(phase.deriv2(0.3) + math.sin(0.3)) < 1e-5


@given(st.floats(min_value=20.0, max_value=300.0), st.floats(min_value=-1.0, max_value=1.0))
@settings(max_examples=20, deadline=None)
def test_value_within_error_estimate(lam, shift):
    phase = Phase1D(eval=lambda x: (x - shift) ** 2 * 0.5)
    amp = lambda x: math.exp(-x * x)
    got = integrate_osc(amp, phase, lam, (-3.0, 3.0), tol=1e-8)
    ref = brute_force(amp, phase.eval, lam, -3.0, 3.0, n=40_000)
    assert abs(got.value - ref) < 50 * (got.err_estimate + 1e-10)
