"""Tests for the geometry / phase layer."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cylwave import phases as ph


def test_dist_cyl_examples():
    assert ph.dist_cyl(ph.CylPoint(2.0, 0.0, 0.0), ph.SourceConfig(2.0)) == 0.0
    assert abs(ph.dist_cyl(ph.CylPoint(2.0, math.pi, 0.0), ph.SourceConfig(2.0)) - 4.0) < 1e-14
    assert abs(ph.dist_cyl(ph.CylPoint(1.0, math.pi / 2, 0.0), ph.SourceConfig(1.0))
               - math.sqrt(2.0)) < 1e-14


def test_dist_cyl_matches_cartesian_and_triangle():
    rng = np.random.default_rng(7)
    for _ in range(200):
        q = ph.CylPoint(1.0 + rng.uniform(0, 4), rng.uniform(0, 2 * math.pi),
                        rng.uniform(-3, 3))
        s = ph.SourceConfig(1.0 + rng.uniform(0, 4))
        d = ph.dist_cyl(q, s)
        qc = np.array(q.to_cartesian())
        sc = np.array([s.s, 0.0, 0.0])
        assert abs(d - np.linalg.norm(qc - sc)) < 1e-12 * max(1.0, d)
        # triangle inequality through a random third point
        m = ph.CylPoint(1.0 + rng.uniform(0, 4), rng.uniform(0, 2 * math.pi),
                        rng.uniform(-3, 3))
        mc = np.array(m.to_cartesian())
        assert d <= np.linalg.norm(qc - mc) + np.linalg.norm(mc - sc) + 1e-12


def test_domain_invariants():
    with pytest.raises(ph.DomainError):
        ph.CylPoint(0.5, 0.0, 0.0)
    with pytest.raises(ph.DomainError):
        ph.SourceConfig(0.99)
    q = ph.CylPoint(2.0, 2 * math.pi + 0.3, 1.0)
    assert 0 <= q.theta < 2 * math.pi
    assert abs(q.x - 1.0) < 1e-15
    assert abs(q.y - (math.pi / 2 - 0.3)) < 1e-15


def test_apparent_contour():
    th, ys = ph.apparent_contour(math.sqrt(2.0))
    assert abs(th - math.pi / 4) < 1e-14
    for s in [1.1, 2.0, 10.0]:
        th, ys = ph.apparent_contour(s)
        assert abs(th + ys - math.pi / 2) < 1e-14
    assert ph.apparent_contour(1e9)[0] > math.pi / 2 - 1e-8
    with pytest.raises(ph.DomainError):
        ph.apparent_contour(1.0)


def test_critical_points_ypm():
    # glancing: double root at y*(x)
    yp, ym = ph.critical_points_ypm(0.2, 1.2, 2.0)
    assert abs(yp - ym) < 1e-12
    assert abs(yp - math.asin(1.2 / 2.0)) < 1e-12
    # x = 0, alpha = 1, s = 2 -> both at pi/6
    yp, ym = ph.critical_points_ypm(0.0, 1.0, 2.0)
    assert abs(yp - math.pi / 6) < 1e-14 and abs(ym - math.pi / 6) < 1e-14
    with pytest.raises(ph.DomainError):
        ph.critical_points_ypm(0.0, 1.5, 1.2)


def test_critical_points_are_stationary_and_phi_values_match():
    rng = np.random.default_rng(3)
    for _ in range(50):
        x = rng.uniform(0.0, 0.5)
        s = 1.0 + x + rng.uniform(0.2, 2.0)
        at = rng.uniform(0.5, 1.0 + x)
        yp, ym = ph.critical_points_ypm(x, at, s)
        for y0, sign in [(yp, -1.0), (ym, +1.0)]:
            f = lambda y: y * at + ph.phi_normal(x, y, 0.0, s)
            h = 1e-6
            d = (f(y0 + h) - f(y0 - h)) / (2 * h)
            assert abs(d) < 1e-8
            expect = math.sqrt(s * s - at * at) + sign * math.sqrt((1 + x) ** 2 - at * at)
            assert abs(ph.phi_normal(x, y0, 0.0, s) - expect) < 1e-10


def test_gamma0_closed_form_values():
    # Gamma0(1, s) = sqrt(s^2-1) + arcsin(1/s); at s = sqrt(2): 1 + pi/4
    assert abs(ph.gamma0(1.0, math.sqrt(2.0)) - (1.0 + math.pi / 4)) < 1e-12
    for s in [1.5, math.sqrt(2.0), 2.0, 5.0]:
        assert abs(ph.gamma0(1.0, s) - (math.sqrt(s * s - 1) + math.asin(1 / s))) < 1e-12


def test_gamma0_derivatives_at_one():
    h = 1e-4
    for s in [1.5, math.sqrt(2.0), 2.0, 5.0]:
        d1 = (ph.gamma0(1.0 + h, s) - ph.gamma0(1.0 - h, s)) / (2 * h)
        assert abs(d1 - math.asin(1.0 / s)) < 1e-6
        d2 = (ph.gamma0(1.0 + h, s) - 2 * ph.gamma0(1.0, s) + ph.gamma0(1.0 - h, s)) / h**2
        assert abs(d2 - 1.0 / math.sqrt(s * s - 1.0)) < 1e-4


def test_gamma0_against_independent_closed_form():
    # the integrated Taylor data gives Gamma0 = at*arcsin(at/s) + sqrt(s^2-at^2)
    for s in [1.5, 2.0, 3.0]:
        for at in [0.9, 0.97, 1.0, 1.03]:
            expect = at * math.asin(at / s) + math.sqrt(s * s - at * at)
            assert abs(ph.gamma0(at, s) - expect) < 1e-12


def test_gamma0_x_independence_and_difference_identity():
    # the half-sum of critical values of y*at + phi(x,y,0,s) is x-independent,
    # and (3/4) of the difference equals at * (-zt)^{3/2}((1+x)/at)
    from cylwave.specfun import zeta_tilde
    rng = np.random.default_rng(11)
    s = 2.5
    for _ in range(40):
        x = rng.uniform(0.0, 0.4)
        at = rng.uniform(0.9, 1.0 + x)
        yp, ym = ph.critical_points_ypm(x, at, s)
        f = lambda y: y * at + ph.phi_normal(x, y, 0.0, s)
        half_sum = 0.5 * (f(yp) + f(ym))
        assert abs(half_sum - ph.gamma0(at, s)) < 1e-6
        diff = f(ym) - f(yp)
        target = (4.0 / 3.0) * at * (-zeta_tilde((1.0 + x) / at)) ** 1.5
        assert abs(diff - target) < 1e-6


def test_gamma_tilde_taylor_data():
    # r = sqrt(2), y_Q = 0: Gamma~(1, sqrt 2) = 1 - pi/4
    got = ph.gamma_tilde(1.0, math.sqrt(2.0), 0.0)
    assert abs(got - (1.0 - math.pi / 4)) < 1e-12
    for r in [1.5, math.sqrt(2.0), 2.0, 5.0]:
        for y_Q in [0.0, 0.3]:
            y_c = y_Q + math.acos(1.0 / r)
            assert abs(ph.gamma_tilde(1.0, r, y_Q) - (math.sqrt(r * r - 1) - y_c)) < 1e-12
            h = 1e-4
            d1 = (ph.gamma_tilde(1 + h, r, y_Q) - ph.gamma_tilde(1 - h, r, y_Q)) / (2 * h)
            assert abs(d1 + y_c) < 1e-6
            d2 = (ph.gamma_tilde(1 + h, r, y_Q) - 2 * ph.gamma_tilde(1, r, y_Q)
                  + ph.gamma_tilde(1 - h, r, y_Q)) / h**2
            assert abs(d2 - 1.0 / math.sqrt(r * r - 1)) < 1e-4


def test_gamma_tilde_relation_to_gamma0():
    for at in [0.96, 0.98, 1.0, 1.02, 1.04]:
        got = ph.gamma_tilde(at, 2.0, 0.25)
        expect = -(0.25 + math.pi / 2) * at + ph.gamma0(at, 2.0)
        assert abs(got - expect) < 1e-10


def test_eikonal_residuals():
    rng = np.random.default_rng(5)
    for _ in range(100):
        x = rng.uniform(0.0, 0.6)
        y = rng.uniform(-0.5, 0.5)
        z = rng.uniform(-0.5, 0.5)
        gamma = rng.uniform(-0.6, 0.6)
        alpha = rng.uniform(0.5, 1.4)
        r1, r2 = ph.eikonal_residual(x, y, z, alpha, gamma)
        assert abs(r1) < 1e-6
        assert abs(r2) < 1e-12
    # glancing surface: (1+x) sqrt(1-gamma^2)/alpha = 1 uses zeta = 0
    x, gamma = 0.3, 0.4
    alpha = (1 + x) * math.sqrt(1 - gamma**2)
    r1, r2 = ph.eikonal_residual(x, 0.1, 0.2, alpha, gamma)
    assert abs(r1) < 1e-6 and abs(r2) < 1e-12


def test_boundary_phase_critical_z_formula():
    q = ph.CylPoint(2.2, 1.1, 1.7)
    s = ph.SourceConfig(2.8)
    for th in [0.2, 0.6, 0.9]:
        zc = ph.critical_z_for_theta(th, q, s)
        _, dz = ph.boundary_phase_gradient(th, zc, q, s)
        assert abs(dz) < 1e-10


def test_boundary_phase_symmetric_configuration():
    # theta_Q = 0, z_Q = 0, r = s: the bisector theta = 0 is critical
    q = ph.CylPoint(2.0, 0.0, 0.0)
    s = ph.SourceConfig(2.0)
    dth, dz = ph.boundary_phase_gradient(0.0, 0.0, q, s)
    assert abs(dth) < 1e-14 and abs(dz) < 1e-14


NEWTON_CASES = [
    # (s, r, theta_Q, z_Q, theta0) spanning the three sign regimes
    (2.929, 1.846, 0.321, -1.934, None),
    (3.579, 1.149, 2.346, -1.297, 1.5),
    (1.298, 3.506, 2.515, -1.043, 2.0),
]


def test_newton_critical_points_and_hessian_fd():
    regimes = set()
    for s, r, thQ, zQ, th0 in NEWTON_CASES:
        q = ph.CylPoint(r, thQ, zQ)
        src = ph.SourceConfig(s)
        th, zz = ph.newton_critical_point(q, src, theta0=th0)
        g = ph.boundary_phase_gradient(th, zz, q, src)
        assert math.hypot(*g) < 1e-10
        rep = ph.boundary_phase_hessian(th, zz, q, src)
        assert rep.fd_residual < 1e-6
        assert abs(rep.det - (rep.d2_zz * rep.d2_tt - rep.d2_tz**2)) < 1e-14
        regime = ph.classify_critical_point(th, zz, q, src)
        regimes.add(regime)
        det_cf = ph.hessian_det_closed_form(th, zz, q, src)
        assert abs(rep.det - det_cf) < 1e-6 * max(1.0, abs(rep.det))
    assert regimes == {"different-signs", "illuminated", "shadow"}


# ----------------------------------------------------------------- cutoffs

def test_cutoff_basic_supports():
    c = ph.make_cutoffs(0.05)
    assert c.psi0(0.5) == 1.0
    assert c.psi0(1.0) == 1.0
    assert c.psi0(0.2) == 0.0
    for j in range(1, 8):
        if 4.0**j * 0.5 > 4.0:
            assert c.psi_j(j, 0.5) == 0.0
    assert c.chi(1.0) == 1.0
    assert c.chi(0.4) == 0.0
    assert c.chi(0.75) == 1.0 and c.chi(1.5) == 1.0
    assert c.chi0(1.5) == 1.0 and c.chi0(-1.5) == 1.0
    assert c.chi0(2.0) == 0.0
    # chi_eps supported in |x - 1| <= 2 eps
    assert c.chi_eps(1.0) == 1.0
    assert c.chi_eps(1.0 + 2.1 * c.eps) == 0.0


def test_cutoff_partition_of_unity():
    c = ph.make_cutoffs(0.05)
    J = 16
    betas = np.concatenate([10.0 ** np.arange(-6, 0.001, 0.5),
                            np.logspace(-8, 0, 60)])
    total = c.psi0(betas) + sum(c.psi_j(j, betas) for j in range(1, J + 1))
    ok = betas >= 4.0 ** (-J)
    assert np.max(np.abs(total[ok] - 1.0)) < 1e-10


def test_cutoff_ranges_and_smoothness():
    c2 = ph.make_cutoffs(0.05, smoothness="c2")
    c4 = ph.make_cutoffs(0.05, smoothness="c4")
    xs = np.linspace(1e-6, 4.0, 2000)
    for c in (c2, c4):
        for f in (c.psi0, c.psi, c.chi):
            v = f(xs)
            assert np.all(v >= 0.0) and np.all(v <= 1.0)
    # psi supported in (1/4, 4)
    assert c4.psi(0.24) == 0.0 and c4.psi(4.01) == 0.0
    assert c4.psi(1.0) == 1.0


def test_make_cutoffs_validation():
    with pytest.raises(ph.DomainError):
        ph.make_cutoffs(0.2)
    with pytest.raises(ph.DomainError):
        ph.make_cutoffs(0.05, smoothness="c9")


def test_j_split():
    assert ph.j_split(math.sqrt(2.0), 1.0 / 64.0) == 2
    assert ph.j_split(1.5, 0.9) == 0  # tiny s/h
    assert ph.j_split(2.0, 0.5) == 0


@given(st.floats(min_value=1.0, max_value=50.0), st.floats(min_value=1e-4, max_value=0.99))
@settings(max_examples=200, deadline=None)
def test_j_split_sandwich(s, h):
    j = ph.j_split(s, h)
    assert 2.0 ** (-3 * j) * s / h >= 1.0 - 1e-9
    assert 2.0 ** (-3 * (j + 1)) * s / h < 1.0 + 1e-9
