"""Oscillatory quadrature and a stationary-phase reference evaluator.

``integrate_osc`` computes integrals of the form  ∫ amp(x) e^{i lam phase(x)} dx
by adaptive bisection with two panel rules: a Gauss-Kronrod 15(7) rule on
panels where the phase barely turns, and a Filon-type rule elsewhere in
which the phase is Chebyshev-fitted, its quadratic part integrated exactly
through Fresnel-function moments of e^{i(Ax + Bx^2)}, and the small cubic
remainder absorbed into the amplitude.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from numpy.polynomial import chebyshev as _cheb
from scipy import special as _sp

__all__ = [
    "Phase1D",
    "QuadResult",
    "OscQuadError",
    "DegenerateCriticalPointError",
    "integrate_osc",
    "stationary_phase_1d",
]

_FD_STEP = 1e-6          # finite-difference step for missing derivatives
_PHASE_FIT_DEG = 8       # Chebyshev degree for phase/amplitude panel fits
_CUBIC_TOL = 0.08        # max radians of non-quadratic phase kept in a panel
_GK_PHASE_SPAN = 8.0     # below this phase turn, plain GK beats Filon


class OscQuadError(RuntimeError):
    """Quadrature failed to reach the requested tolerance within budget."""


class DegenerateCriticalPointError(ValueError):
    """Second derivative too small at the critical point (Airy regime)."""


@dataclass
class Phase1D:
    """A scalar phase with optional analytic derivatives.

    Missing derivatives are replaced by central finite differences with
    step 1e-6 * (1 + |x|).
    """

    eval: Callable[[float], float]
    d1: Optional[Callable[[float], float]] = None
    d2: Optional[Callable[[float], float]] = None

    def deriv1(self, x: float) -> float:
        if self.d1 is not None:
            return self.d1(x)
        h = _FD_STEP * (1.0 + abs(x))
        return (self.eval(x + h) - self.eval(x - h)) / (2.0 * h)

    def deriv2(self, x: float) -> float:
        if self.d2 is not None:
            return self.d2(x)
        h = (_FD_STEP * 100.0) * (1.0 + abs(x))
        return (self.eval(x + h) - 2.0 * self.eval(x) + self.eval(x - h)) / (h * h)


@dataclass(frozen=True)
class QuadResult:
    value: complex
    err_estimate: float
    n_evals: int

    def __post_init__(self):
        if self.err_estimate < 0:
            raise ValueError("err_estimate must be >= 0")


# Gauss-Kronrod 15(7) nodes/weights on [-1, 1].
_XGK = np.array([
    -0.991455371120813, -0.949107912342759, -0.864864423359769,
    -0.741531185599394, -0.586087235467691, -0.405845151377397,
    -0.207784955007898, 0.0, 0.207784955007898, 0.405845151377397,
    0.586087235467691, 0.741531185599394, 0.864864423359769,
    0.949107912342759, 0.991455371120813])
_WGK = np.array([
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728, 0.204432940075298,
    0.190350578064785, 0.169004726639267, 0.140653259715525,
    0.104790010322250, 0.063092092629979, 0.022935322010529])
_WG7 = np.array([
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469, 0.381830050505119, 0.279705391489277,
    0.129484966168870])


def _fresnel_E(u: np.ndarray, b: float) -> np.ndarray:
    """∫_0^u e^{i b v^2} dv for real b != 0 (vectorized in u)."""
    scale = math.sqrt(math.pi / (2.0 * abs(b)))
    s, c = _sp.fresnel(u * math.sqrt(2.0 * abs(b) / math.pi))
    e = scale * (c + 1j * s)
    return e if b > 0 else np.conj(e)


def _moments_fresnel(a: float, b: float, kmax: int) -> np.ndarray:
    """M_k = ∫_{-1}^{1} x^k e^{i(ax + bx^2)} dx by Fresnel + forward recursion.

    Stable only for |a| <~ 2.5 |b| and kmax <~ 2|b| (growth factors near 1).
    """
    m = np.zeros(kmax + 1, dtype=complex)
    sh = a / (2.0 * b)
    ends = _fresnel_E(np.array([1.0 + sh, -1.0 + sh]), b)
    m[0] = np.exp(-1j * a * a / (4.0 * b)) * (ends[0] - ends[1])
    e_hi = np.exp(1j * (a + b))
    e_lo = np.exp(1j * (-a + b))
    for k in range(kmax):
        bracket = e_hi - ((-1.0) ** k) * e_lo
        prev = m[k - 1] if k >= 1 else 0.0
        m[k + 1] = (bracket - k * prev - 1j * a * m[k]) / (2j * b)
    return m


def _moments_linear(a: float, kmax: int) -> np.ndarray:
    """M_k = ∫_{-1}^{1} x^k e^{iax} dx by parts; stable while kmax < |a|."""
    m = np.zeros(kmax + 1, dtype=complex)
    e_hi = np.exp(1j * a)
    e_lo = np.exp(-1j * a)
    m[0] = (e_hi - e_lo) / (1j * a)
    for k in range(1, kmax + 1):
        bracket = e_hi - ((-1.0) ** k) * e_lo
        m[k] = bracket / (1j * a) - (k / (1j * a)) * m[k - 1]
    return m


def _moments_gauss(a: float, b: float, kmax: int) -> np.ndarray:
    """Direct Gauss-Legendre moments; exact for mild total oscillation."""
    xg, wg = np.polynomial.legendre.leggauss(64)
    ph = np.exp(1j * (a * xg + b * xg * xg))
    pw = np.vander(xg, kmax + 1, increasing=True)
    return (wg * ph) @ pw


def _panel_filon(amp, phase: Phase1D, lam: float, a: float, b: float):
    """Filon-Chebyshev rule on [a, b]; returns (value, ok, n_evals, est)."""
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    deg = _PHASE_FIT_DEG
    xhat = np.cos(np.pi * np.arange(deg + 1) / deg)  # Chebyshev-Lobatto
    xs = mid + half * xhat
    ph = np.array([phase.eval(x) for x in xs], dtype=float)
    cf = _cheb.chebfit(xhat, ph, deg)
    c0, c1, c2 = cf[0], cf[1], (cf[2] if len(cf) > 2 else 0.0)
    a_mom, b_mom = lam * c1, 2.0 * lam * c2
    if lam * np.sum(np.abs(cf[3:])) > _CUBIC_TOL:
        return 0.0 + 0.0j, False, len(xs), math.inf

    # pick a moment rule with a stable evaluation regime
    absorb_b = False
    if abs(b_mom) <= 8.0:
        if abs(a_mom) <= 30.0:
            rule = "gauss"
        else:
            rule = "linear"       # quadratic term joins the amplitude
            absorb_b = True
    else:
        if abs(a_mom) <= 2.5 * abs(b_mom):
            rule = "fresnel"
        else:
            # linear-dominant with a fat quadratic term: subdivide (the
            # quadratic coefficient shrinks 4x per halving)
            return 0.0 + 0.0j, False, len(xs), math.inf

    if absorb_b and abs(b_mom) > 0.5:
        deg = 10 + int(math.ceil(1.4 * abs(b_mom)))
        xhat = np.cos(np.pi * np.arange(deg + 1) / deg)
        xs = mid + half * xhat
        ph = np.array([phase.eval(x) for x in xs], dtype=float)

    resid = ph - (c0 - c2) - c1 * xhat
    if not absorb_b:
        resid = resid - 2.0 * c2 * xhat * xhat
    av = np.array([amp(x) for x in xs], dtype=complex)
    amp_eff = av * np.exp(1j * lam * resid)
    acf = _cheb.chebfit(xhat, amp_eff, deg)
    pcoef = _cheb.cheb2poly(acf)
    kmax = len(pcoef) - 1
    if rule == "gauss":
        mom = _moments_gauss(a_mom, 0.0 if absorb_b else b_mom, kmax)
    elif rule == "linear":
        mom = _moments_linear(a_mom, kmax)
    else:
        mom = _moments_fresnel(a_mom, b_mom, kmax)
    val = half * np.exp(1j * lam * (c0 - c2)) * np.dot(pcoef, mom[: len(pcoef)])
    # self-certified estimate: amplitude-fit tail x moment scale + roundoff
    mom_scale = min(2.0, 4.0 / (1.0 + abs(a_mom) + abs(b_mom)) + abs(mom[0]))
    tail = float(np.sum(np.abs(acf[-2:])))
    est = half * (tail * mom_scale + 1e-14 * float(np.sum(np.abs(pcoef))) + 2e-15 * abs(a_mom) * abs(mom[0]))
    return complex(val), True, len(xs), float(est)


def _panel_gk(amp, phase: Phase1D, lam: float, a: float, b: float):
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    xs = mid + half * _XGK
    fv = np.array([amp(x) * np.exp(1j * lam * phase.eval(x)) for x in xs], dtype=complex)
    vk = half * np.dot(_WGK, fv)
    vg = half * np.dot(_WG7, fv[1::2])
    return complex(vk), abs(vk - vg), len(xs)


def _panel_value(amp, phase, lam, a, b):
    """Evaluate one panel; returns (value, err_estimate, n_evals)."""
    span = lam * abs(phase.eval(b) - phase.eval(a))
    if span < _GK_PHASE_SPAN:
        return _panel_gk(amp, phase, lam, a, b)
    v, ok, n, est = _panel_filon(amp, phase, lam, a, b)
    if not ok:
        return None, math.inf, n
    return v, est, n


def integrate_osc(amp: Callable[[float], complex], phase: Phase1D, lam: float,
                  interval: tuple[float, float], tol: float = 1e-8,
                  max_panels: int = 20_000) -> QuadResult:
    """Adaptive oscillatory integral of amp * exp(i lam phase) over interval.

    Raises ``OscQuadError`` when the error estimate stays above ``tol``
    after the panel budget is spent.
    """
    a, b = float(interval[0]), float(interval[1])
    if not lam > 0:
        raise ValueError("lam must be positive")
    if a == b:
        return QuadResult(0.0, 0.0, 0)
    sign = 1.0
    if b < a:
        a, b = b, a
        sign = -1.0

    n_evals = 0

    def recurse(lo, hi, depth):
        nonlocal n_evals
        v, err, n = _panel_value(amp, phase, lam, lo, hi)
        n_evals += n
        local = tol * max(1e-3, (hi - lo) / (b - a))
        if v is not None and not math.isinf(err) and err < local:
            return v, err
        if depth <= 0 or n_evals > max_panels * (_PHASE_FIT_DEG + 7):
            if v is None or math.isinf(err):
                raise OscQuadError("panel budget exhausted before convergence")
            return v, err
        midp = 0.5 * (lo + hi)
        v1, e1 = recurse(lo, midp, depth - 1)
        v2, e2 = recurse(midp, hi, depth - 1)
        return v1 + v2, e1 + e2

    # initial split keeps per-panel phase turn moderate
    try:
        tot_span = lam * abs(phase.eval(b) - phase.eval(a))
    except Exception:
        tot_span = lam
    n0 = max(2, min(64, int(tot_span / 30.0) + 2))
    cuts = np.linspace(a, b, n0 + 1)
    total = 0.0 + 0.0j
    err_total = 0.0
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        v, e = recurse(lo, hi, 24)
        total += v
        err_total += e
    if err_total > max(tol, 1e-14):
        # one honest retry with a finer initial split before giving up
        total2 = 0.0 + 0.0j
        err2 = 0.0
        cuts = np.linspace(a, b, 4 * n0 + 1)
        for lo, hi in zip(cuts[:-1], cuts[1:]):
            v, e = recurse(lo, hi, 24)
            total2 += v
            err2 += e
        if err2 > tol:
            raise OscQuadError(
                f"err_estimate {err2:.2e} above tol {tol:.2e} after budget")
        total, err_total = total2, err2
    return QuadResult(sign * total, float(err_total), n_evals)


def stationary_phase_1d(amp: Callable[[float], complex], phase: Phase1D,
                        x_c: float, lam: float) -> complex:
    """Leading-order stationary phase at a nondegenerate critical point x_c.

    amp(x_c) sqrt(2 pi / (lam |phase''(x_c)|)) e^{i lam phase(x_c)}
    e^{i sgn(phase'') pi/4}.  Raises ``DegenerateCriticalPointError`` when
    |phase''(x_c)| falls below the 1e-8 lam^{1/3}-scaled threshold (the
    turning-point regime where this formula loses its validity).
    """
    d2 = phase.deriv2(x_c)
    if abs(d2) < 1e-8 * lam ** (1.0 / 3.0):
        raise DegenerateCriticalPointError(
            f"|phase''({x_c})| = {abs(d2):.2e} is degenerate at lam = {lam}")
    d1 = phase.deriv1(x_c)
    if abs(d1) > 1e-4 * max(1.0, abs(d2)):
        raise ValueError(f"x_c is not a critical point: phase'({x_c}) = {d1:.2e}")
    sgn = 1.0 if d2 > 0 else -1.0
    return (amp(x_c) * math.sqrt(2.0 * math.pi / (lam * abs(d2)))
            * np.exp(1j * lam * phase.eval(x_c)) * np.exp(1j * sgn * math.pi / 4.0))
