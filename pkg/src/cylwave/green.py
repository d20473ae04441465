"""Exact frequency-domain solution exterior to the unit cylinder.

The modal radial kernel (outgoing at infinity, Dirichlet at r = 1; r >= rt)

    G_n(r, rt, kappa) = (pi/2i) (r rt)^{-1/2}
                        [ J_n(rt k) - (J_n(k)/H_n(k)) H_n(rt k) ] H_n(r k)

is summed over angular modes and integrated over the axial frequency to
produce the resolvent

    R(Q, Q0, tau) = weight(r, s) * ∫ e^{i z vt} sum_n e^{i n theta}
                    G_{|n|}(r, s, kappa(vt, tau)) dvt,
    kappa = sqrt(tau^2 - vt^2),

with the evanescent band |vt| > tau evaluated through the modified-Bessel
form (kappa = i sqrt(vt^2 - tau^2)).  The radial weight

    weight(r, s) = -sqrt(r s) / (4 pi^2)

is pinned by the free-kernel calibration: with it, the free part of the
mode sum (J_n H_n, no Dirichlet subtraction) reproduces exp(i tau d)/(4 pi d)
exactly (cylindrical-harmonics addition theorem), so R carries the outgoing
e^{+i tau d} convention.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special as _sp

from .phases import CutoffSystem, CylPoint, SourceConfig, dist_cyl

__all__ = [
    "ModalParams",
    "TruncationPolicy",
    "KernelSample",
    "TruncationError",
    "modal_green",
    "modal_green_split",
    "boundary_normal_derivative_modal",
    "mode_truncation",
    "resolvent",
    "lp_resolvent",
    "resolvent_free_part",
    "radial_weight",
]

_QUARTER_PI_I = math.pi / 4j   # pi/(4 i)
_HALF_PI_I = math.pi / 2j      # pi/(2 i)


class TruncationError(RuntimeError):
    """Mode-sum or quadrature tail estimate exceeded the policy tolerance."""


@dataclass(frozen=True)
class ModalParams:
    """Spectral quadruple of one resolvent term; kappa is derived, not stored."""

    tau: float
    vartheta: float
    n: int

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError("tau must be positive")
        if self.n < 0:
            raise ValueError("n must be >= 0")

    @property
    def kappa(self) -> float:
        if abs(self.vartheta) > self.tau:
            raise ValueError("kappa is imaginary for |vartheta| > tau")
        return math.sqrt(self.tau ** 2 - self.vartheta ** 2)


@dataclass(frozen=True)
class TruncationPolicy:
    """Controls for the mode sum and the axial-frequency integral."""

    n_max: int = 2000
    vartheta_cut: float = 400.0
    tol: float = 1e-8
    include_evanescent: bool = True

    def __post_init__(self):
        if self.n_max < 1:
            raise ValueError("n_max must be >= 1")
        if not self.tol > 0:
            raise ValueError("tol must be positive")


@dataclass(frozen=True)
class KernelSample:
    """A kernel value with its truncation metadata."""

    value: complex
    n_used: int
    quad_err: float

    def __post_init__(self):
        if self.quad_err < 0:
            raise ValueError("quad_err must be >= 0")


def radial_weight(r: float, s: float) -> float:
    """Mode-sum weight -sqrt(r s)/(4 pi^2), frozen by the free-kernel calibration."""
    return -math.sqrt(r * s) / (4.0 * math.pi ** 2)


# ------------------------------------------------------------ modal kernels

def modal_green(n: int, r: float, r_src: float, kappa: float) -> complex:
    """Outgoing Dirichlet modal kernel; symmetric in (r, r_src)."""
    if not kappa > 0:
        raise ValueError("kappa must be positive")
    hi, lo = (r, r_src) if r >= r_src else (r_src, r)
    jn_lo = _sp.jv(n, lo * kappa)
    jn_1 = _sp.jv(n, kappa)
    hn_1 = _sp.hankel1(n, kappa)
    hn_lo = _sp.hankel1(n, lo * kappa)
    hn_hi = _sp.hankel1(n, hi * kappa)
    return _HALF_PI_I * (r * r_src) ** -0.5 * (jn_lo - (jn_1 / hn_1) * hn_lo) * hn_hi


def modal_green_split(n: int, r: float, r_src: float,
                      kappa: float) -> tuple[complex, complex]:
    """Incoming/outgoing split (G+, G-) with G+ - G- = modal_green."""
    if not kappa > 0:
        raise ValueError("kappa must be positive")
    hi, lo = (r, r_src) if r >= r_src else (r_src, r)
    pref = _QUARTER_PI_I * (r * r_src) ** -0.5
    hn_lo = complex(_sp.hankel1(n, lo * kappa))
    hn_hi = complex(_sp.hankel1(n, hi * kappa))
    hn_1 = complex(_sp.hankel1(n, kappa))
    g_plus = pref * np.conj(hn_lo) * hn_hi
    g_minus = pref * (np.conj(hn_1) / hn_1) * hn_lo * hn_hi
    return complex(g_plus), complex(g_minus)


def boundary_normal_derivative_modal(n: int, r_src: float, kappa: float) -> complex:
    """d/dr of modal_green(n, r, r_src, kappa) at the boundary r = 1.

    The cylinder Wronskian J_n(x) H_n'(x) - J_n'(x) H_n(x) = 2i/(pi x)
    collapses the bracket derivative to -(2i/pi)/H_n(kappa), leaving
    -r_src^{-1/2} H_n(r_src kappa) / H_n(kappa).
    """
    if not r_src > 1:
        raise ValueError("source must be strictly exterior")
    return complex(-(r_src ** -0.5) * _sp.hankel1(n, r_src * kappa)
                   / _sp.hankel1(n, kappa))


def mode_truncation(tau: float, r_max: float, tol: float) -> int:
    """Smallest N with the large-order envelope below tol.

    envelope(N) = (e tau r_max / 2N)^N / sqrt(2 pi N), the magnitude scale of
    the first neglected J factor; validated against measured mode-sum tails.
    """
    if not (tau > 0 and r_max > 0 and tol > 0):
        raise ValueError("tau, r_max, tol must be positive")
    w = tau * r_max
    n = max(1, int(w))
    while n < 100_000:
        log_env = n * (math.log(w / (2.0 * n)) + 1.0) - 0.5 * math.log(2 * math.pi * n)
        if log_env < math.log(tol):
            return n
        n += 1
    return n


# ------------------------------------------------- vectorized internal sums

def _mode_orders(tau: float, r_max: float, policy: TruncationPolicy,
                 r_min: float | None = None) -> int:
    n = mode_truncation(tau, r_max, policy.tol * 1e-2) + 8
    if r_min is not None and r_min < r_max:
        # tail of |J_n(k lo) H_n(k hi)| ~ (lo/hi)^n / (pi n) at every kappa;
        # binding when the radii are close
        q = r_min / r_max
        target = math.log(policy.tol * 1e-2)
        n_geom = 8
        while (n_geom * math.log(q) - math.log(math.pi * n_geom) > target
               and n_geom < policy.n_max):
            n_geom += 4
        n = max(n, n_geom)
    return min(n, policy.n_max)


def _fold_matrix(n_count: int, thetas: np.ndarray) -> np.ndarray:
    """cos-fold over modes: row n carries (1 if n==0 else 2) cos(n theta)."""
    ns = np.arange(n_count)[:, None]
    m = 2.0 * np.cos(ns * np.asarray(thetas)[None, :])
    m[0, :] = 1.0
    return m


def _modal_rows_prop(kappas: np.ndarray, r: float, s: float, n_count: int,
                     free_only: bool = False) -> np.ndarray:
    """G_n(r, s, kappa) for n = 0..n_count-1 on a kappa grid; [n, kappa].

    Where n dwarfs kappa*hi the J/H product under/overflows doubles; those
    entries are replaced by the stable large-order limits
        J_n(k lo) H_n(k hi)          -> -i (lo/hi)^n / (pi n),
        (J_n/H_n)(k) H_n(k lo) H_n(k hi) -> -i (lo hi)^{-n} / (pi n).
    """
    hi, lo = (r, s) if r >= s else (s, r)
    ns = np.arange(n_count)[:, None]
    k = np.asarray(kappas)[None, :]
    with np.errstate(all="ignore"):
        direct = _sp.jv(ns, lo * k) * _sp.hankel1(ns, hi * k)
        if free_only:
            prod = direct
        else:
            refl = (_sp.jv(ns, k) / _sp.hankel1(ns, k)) \
                * _sp.hankel1(ns, lo * k) * _sp.hankel1(ns, hi * k)
            prod = direct - refl
    bad = ~np.isfinite(prod)
    if np.any(bad):
        n_safe = np.maximum(ns, 1).astype(float)
        fill_direct = (-1j / (math.pi * n_safe)) * np.exp(ns * math.log(lo / hi)) \
            * np.ones_like(k)
        if free_only:
            fill = fill_direct
        else:
            fill = fill_direct - (-1j / (math.pi * n_safe)) \
                * np.exp(-ns * math.log(lo * hi)) * np.ones_like(k)
        prod = np.where(bad, fill, prod)
    return _HALF_PI_I * (r * s) ** -0.5 * prod


def _modal_rows_evan(mus: np.ndarray, r: float, s: float, n_count: int,
                     free_only: bool = False) -> np.ndarray:
    """Evanescent-band kernel rows, exponentially scaled for stability.

    Large-order under/overflow entries are filled with the limits
        I_n(m lo) K_n(m hi)              -> (lo/hi)^n / (2n),
        (I_n/K_n)(m) K_n(m lo) K_n(m hi) -> (lo hi)^{-n} / (2n).
    """
    hi, lo = (r, s) if r >= s else (s, r)
    ns = np.arange(n_count)[:, None]
    m = np.asarray(mus)[None, :]
    with np.errstate(all="ignore"):
        direct = _sp.ive(ns, lo * m) * _sp.kve(ns, hi * m) * np.exp(-m * (hi - lo))
        if free_only:
            bracket = direct
        else:
            refl = (_sp.ive(ns, m) / _sp.kve(ns, m) * _sp.kve(ns, lo * m)
                    * _sp.kve(ns, hi * m) * np.exp(-m * (lo + hi - 2.0)))
            bracket = direct - refl
    bad = ~np.isfinite(bracket)
    if np.any(bad):
        n_safe = np.maximum(ns, 1).astype(float)
        fill = np.exp(ns * math.log(lo / hi)) / (2.0 * n_safe) * np.ones_like(m)
        if not free_only:
            fill = fill - np.exp(-ns * math.log(lo * hi)) / (2.0 * n_safe) \
                * np.ones_like(m)
        bracket = np.where(bad, fill, bracket)
    return -((r * s) ** -0.5) * bracket


def _gl_panels(a: float, b: float, n_panels: int, order: int = 16):
    xg, wg = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, n_panels + 1)
    half = 0.5 * (edges[1] - edges[0])
    mids = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mids[:, None] + half * xg[None, :]).ravel()
    weights = np.tile(half * wg, n_panels)
    return nodes, weights


def _gl_graded(a: float, b: float, n_bulk: int, edge_levels: int,
               grade_left: bool, grade_right: bool, order: int = 12,
               max_width: float | None = None):
    """Composite Gauss-Legendre with geometric refinement into endpoints.

    The kappa = 0 branch point carries an integrable log singularity (n = 0
    mode); geometric panels resolve it to machine level, the innermost
    sliver of relative width 2^-edge_levels is dropped.  ``max_width`` caps
    every panel (including the graded ones) so that an oscillatory factor of
    known frequency stays resolved.
    """
    edge_frac = 0.25 * (b - a)
    lo = a + (edge_frac if grade_left else 0.0)
    hi = b - (edge_frac if grade_right else 0.0)
    cuts = [np.linspace(lo, hi, max(2, n_bulk + 1))]
    if grade_left:
        scales = a + edge_frac * 2.0 ** -np.arange(edge_levels + 1)
        cuts.insert(0, scales[::-1])
    if grade_right:
        scales = b - edge_frac * 2.0 ** -np.arange(edge_levels + 1)
        cuts.append(scales)
    edges = np.unique(np.concatenate(cuts))
    if max_width is not None and max_width > 0:
        refined = [edges[:1]]
        for e0, e1 in zip(edges[:-1], edges[1:]):
            k = int(math.ceil((e1 - e0) / max_width))
            refined.append(np.linspace(e0, e1, k + 1)[1:])
        edges = np.concatenate(refined)
    xg, wg = np.polynomial.legendre.leggauss(order)
    halves = 0.5 * np.diff(edges)
    mids = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mids[:, None] + halves[:, None] * xg[None, :]).ravel()
    weights = (halves[:, None] * wg[None, :]).ravel()
    return nodes, weights


def _propagating_integral(tau, r, s, theta, z, policy, n_panels,
                          cutoffs: CutoffSystem | None = None,
                          lp_j: int | None = None, free_only=False):
    """∫_{|vt|<tau} e^{i z vt} (mode sum) dvt via vt = tau sin(phi)."""
    n_count = _mode_orders(tau, max(r, s), policy, min(r, s))
    osc = tau * (abs(z) + r + s) + 1.0
    phi, w = _gl_graded(-math.pi / 2, math.pi / 2, n_panels,
                        edge_levels=40, grade_left=True, grade_right=True,
                        max_width=2.0 * math.pi / (2.5 * osc))
    vt = tau * np.sin(phi)
    kap = tau * np.cos(phi)
    jac = tau * np.cos(phi)
    rows = _modal_rows_prop(kap, r, s, n_count, free_only=free_only)
    fold = _fold_matrix(n_count, np.array([theta]))[:, 0]
    msum = fold @ rows
    integrand = np.exp(1j * z * vt) * msum * jac
    if lp_j is not None:
        if cutoffs is None:
            raise ValueError("lp localization needs a CutoffSystem")
        integrand = integrand * cutoffs.psi_j(lp_j, 1.0 - (vt / tau) ** 2)
    return np.dot(w, integrand), n_count


def _evanescent_xi_max(tau: float, r: float, s: float, cut: float) -> float:
    """Integration length in xi = |vt| - tau reaching e^{-40} radial decay."""
    gap = max(abs(r - s), 1e-3)
    mu_max = 40.0 / gap
    xi_max = mu_max * mu_max / (tau + math.sqrt(tau * tau + mu_max * mu_max))
    return min(xi_max, cut)


def _evanescent_integral(tau, r, s, theta, z, policy, n_panels, free_only=False):
    """2 ∫_0^Xi cos(z (tau + xi)) (evanescent mode sum) dxi."""
    n_count = _mode_orders(tau, max(r, s), policy, min(r, s))
    xi_max = _evanescent_xi_max(tau, r, s, policy.vartheta_cut)
    xi, w = _gl_graded(0.0, xi_max, n_panels, edge_levels=40,
                       grade_left=True, grade_right=False,
                       max_width=2.0 * math.pi / (2.5 * (abs(z) + 0.2)))
    mu = np.maximum(np.sqrt(xi * (xi + 2.0 * tau)), 1e-12)
    rows = _modal_rows_evan(mu, r, s, n_count, free_only=free_only)
    fold = _fold_matrix(n_count, np.array([theta]))[:, 0]
    integrand = 2.0 * np.cos(z * (tau + xi)) * (fold @ rows)
    return np.dot(w, integrand), n_count


def _panel_counts(tau, r, s, z):
    span = tau * (abs(z) + r + s + 2.0)
    return max(8, int(span / 10.0) + 8)


def _converged(eval_fn, tol, n0):
    v0 = eval_fn(n0)
    n1 = int(n0 * 1.5) + 2
    v1 = eval_fn(n1)
    err = abs(v1 - v0)
    rounds = 0
    while err > tol and rounds < 3:
        n0, v0 = n1, v1
        n1 = int(n1 * 1.6) + 2
        v1 = eval_fn(n1)
        err = abs(v1 - v0)
        rounds += 1
    return v1, err


def resolvent(Q: CylPoint, Q0: SourceConfig, tau: float,
              policy: TruncationPolicy = TruncationPolicy()) -> KernelSample:
    """Outgoing Dirichlet resolvent at Q for a point source at (s, 0, 0).

    Splits the axial integral into the propagating band |vt| < tau (square
    root endpoint removed by vt = tau sin(phi)) and the evanescent band
    (modified-Bessel form, integrated until the integrand undercuts tol).
    """
    if not tau > 0:
        raise ValueError("tau must be positive")
    r, s, theta, z = Q.r, Q0.s, Q.theta, Q.z
    n_used = _mode_orders(tau, max(r, s), policy, min(r, s))
    if n_used >= policy.n_max:
        raise TruncationError(
            f"mode demand {n_used} exceeds policy.n_max = {policy.n_max}")
    base = _panel_counts(tau, r, s, z)

    vp, err_p = _converged(
        lambda nn: _propagating_integral(tau, r, s, theta, z, policy, nn)[0],
        policy.tol, base)
    value = vp
    err = err_p
    if policy.include_evanescent:
        ev_base = max(10, int(_evanescent_xi_max(tau, r, s, policy.vartheta_cut)
                              * abs(z) / 40.0) + 10)
        ve, err_e = _converged(
            lambda nn: _evanescent_integral(tau, r, s, theta, z, policy, nn)[0],
            policy.tol, ev_base)
        value = value + ve
        err = err + err_e
    if err > 50 * policy.tol:
        raise TruncationError(f"quadrature error {err:.2e} above tolerance")
    w = radial_weight(r, s)
    return KernelSample(value=complex(w * value), n_used=n_used, quad_err=float(err))


def lp_resolvent(Q: CylPoint, Q0: SourceConfig, tau: float, j: int,
                 cutoffs: CutoffSystem,
                 policy: TruncationPolicy = TruncationPolicy()) -> KernelSample:
    """Littlewood-Paley piece: the propagating integrand localized by psi_j(1 - (vt/tau)^2)."""
    if j < 0:
        raise ValueError("j must be >= 0")
    r, s, theta, z = Q.r, Q0.s, Q.theta, Q.z
    n_used = _mode_orders(tau, max(r, s), policy, min(r, s))
    base = _panel_counts(tau, r, s, z)
    v, err = _converged(
        lambda nn: _propagating_integral(tau, r, s, theta, z, policy, nn,
                                         cutoffs=cutoffs, lp_j=j)[0],
        policy.tol, base)
    if err > 50 * policy.tol:
        raise TruncationError(f"quadrature error {err:.2e} above tolerance")
    w = radial_weight(r, s)
    return KernelSample(value=complex(w * v), n_used=n_used, quad_err=float(err))


def resolvent_free_part(Q: CylPoint, Q0: SourceConfig, tau: float,
                        policy: TruncationPolicy = TruncationPolicy()) -> KernelSample:
    """The free (J_n H_n) part of the mode sum; equals e^{i tau d}/(4 pi d).

    This is the calibration object for the radial weight: the cylindrical
    addition theorem turns the weighted mode sum into the outgoing
    free-space kernel.
    """
    r, s, theta, z = Q.r, Q0.s, Q.theta, Q.z
    n_used = _mode_orders(tau, max(r, s), policy, min(r, s))
    base = _panel_counts(tau, r, s, z)
    vp, err_p = _converged(
        lambda nn: _propagating_integral(tau, r, s, theta, z, policy, nn,
                                         free_only=True)[0],
        policy.tol, base)
    ev_base = max(10, int(_evanescent_xi_max(tau, r, s, policy.vartheta_cut)
                          * abs(z) / 40.0) + 10)
    ve, err_e = _converged(
        lambda nn: _evanescent_integral(tau, r, s, theta, z, policy, nn,
                                        free_only=True)[0],
        policy.tol, ev_base)
    w = radial_weight(r, s)
    return KernelSample(value=complex(w * (vp + ve)), n_used=n_used,
                        quad_err=float(err_p + err_e))
