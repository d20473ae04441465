"""Airy, Bessel and Hankel evaluation, exact and in the uniform large-order regime.

Exact values are delegated to scipy.special (series/recurrence/CF machinery);
an independent high-precision oracle (mpmath) lives in the test suite only.
The uniform large-order expansions (Debye/Airy type, cf. Abramowitz & Stegun
9.3.35-9.3.44 and DLMF 10.20) and the turning-point variable ``zeta_tilde``
are implemented here from scratch, with the regime selector covering all
rho > 0.

Conventions
-----------
``A`` is the standard Airy integral Ai; the rotated companions are
``A±(w) = A(exp(∓2iπ/3) w)``.  On the real line ``A = e^{iπ/3} A+ +
e^{-iπ/3} A-`` and ``A-(w) = conj(A+(w))``.  ``hankel_H1`` is the Hankel
function of the first kind, so its large-order Airy expansion pairs with the
rotated function ``A-`` and the constant ``2 e^{-iπ/3}``; the companion of
the second kind pairs with ``A+``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy import special as _sp

__all__ = [
    "AiryBundle",
    "AsymptoticValue",
    "SpecfunRangeError",
    "airy_all",
    "phi_plus",
    "bessel_J",
    "hankel_H1",
    "hankel_negative_order_factor",
    "zeta_tilde",
    "airy_argument_b0",
    "hankel_uniform",
    "bessel_uniform",
]

# Evaluation windows for the exact routines.
W_MAX = 50.0          # Airy argument window
N_MAX = 10_000        # maximal Bessel/Hankel order
_EXP_BUDGET = 700.0   # exponent budget of IEEE doubles

_ROT_PLUS = cmath.exp(-2j * math.pi / 3)   # A+(w) = Ai(_ROT_PLUS * w)
_ROT_MINUS = cmath.exp(+2j * math.pi / 3)  # A-(w) = Ai(_ROT_MINUS * w)

# Taylor coefficients of -zeta_tilde(1+u) / (2^{1/3} u) around u = 0,
# obtained by series-expanding the closed form (sympy, exact rationals).
_ZETA_SERIES = (1.0, -3.0 / 10.0, 32.0 / 175.0, -1037.0 / 7875.0,
                103727.0 / 1010625.0)
_ZETA_SERIES_WINDOW = 1e-3

# Taylor coefficients of the first Airy-expansion correction b0 as a
# function of u = rho - 1 (removable singularity at the turning point).
_CBRT2 = 2.0 ** (1.0 / 3.0)
_B0_SERIES = (_CBRT2 / 70.0, -2.0 * _CBRT2 / 225.0, 953.0 * _CBRT2 / 202125.0,
              1659797.0 * _CBRT2 / 388080000.0)
_B0_SERIES_WINDOW = 0.05

# Regime thresholds of the uniform evaluator.
_TRANSITION_HALF_WIDTH = 2.0   # |rho-1| <= c * n^{-2/3}
_LARGE_ORDER_RHO = 0.08        # below this the pure large-order form is used


class SpecfunRangeError(ValueError):
    """Argument outside the documented evaluation window."""


@dataclass(frozen=True)
class AiryBundle:
    """Values of A, A± and the derivatives of A, A+ at one argument."""

    A: complex
    Aplus: complex
    Aminus: complex
    dA: complex
    dAplus: complex


@dataclass(frozen=True)
class AsymptoticValue:
    """An asymptotic evaluation together with its regime and error estimate."""

    value: complex
    regime: str           # 'exact-series' | 'uniform-airy' | 'transition' | 'large-order'
    err_estimate: float   # relative, from the first dropped term

    def __post_init__(self):
        if self.err_estimate < 0:
            raise ValueError("err_estimate must be >= 0")


def airy_all(w: complex) -> AiryBundle:
    """Evaluate A, A+, A- and the derivatives of A and A+ at ``w``.

    Raises ``SpecfunRangeError`` outside |w| <= W_MAX or when a growing
    solution would exceed the double-precision exponent budget.
    """
    w = complex(w)
    if abs(w) > W_MAX:
        raise SpecfunRangeError(f"|w|={abs(w):.3g} exceeds window {W_MAX}")
    if w != 0:
        growth = (2.0 / 3.0) * (w ** 1.5).real
        if abs(growth) > _EXP_BUDGET:
            raise SpecfunRangeError("growing Airy solution would overflow")
    if w.imag == 0.0:
        a, da, _, _ = _sp.airy(w.real)  # real path keeps A exactly real
    else:
        a, da, _, _ = _sp.airy(w)
    ap, dap, _, _ = _sp.airy(_ROT_PLUS * w)
    am, _, _, _ = _sp.airy(_ROT_MINUS * w)
    return AiryBundle(A=complex(a), Aplus=complex(ap), Aminus=complex(am),
                      dA=complex(da), dAplus=_ROT_PLUS * complex(dap))


def phi_plus(w: float) -> complex:
    """Airy quotient A+'(w)/A+(w); Riccati: phi_plus' = w - phi_plus^2.

    A+ has no real zeros, so this is well defined for all real ``w`` in the
    evaluation window.
    """
    b = airy_all(w)
    return b.dAplus / b.Aplus


def _check_bessel_args(n: int, x: float) -> None:
    if n < 0 or n != int(n):
        raise SpecfunRangeError("order must be a non-negative integer")
    if n > N_MAX:
        raise SpecfunRangeError(f"order {n} exceeds window {N_MAX}")
    if not x > 0:
        raise SpecfunRangeError("argument must be positive")


def bessel_J(n: int, x: float) -> float:
    """Bessel function of the first kind, non-negative integer order."""
    _check_bessel_args(n, x)
    return float(_sp.jv(n, x))


def hankel_H1(n: int, x: float) -> complex:
    """Hankel function of the first kind J_n + i Y_n, x > 0.

    Raises ``SpecfunRangeError`` when |Y_n(x)| would overflow a double
    (n far above x); that pair is outside the documented (n, x) window.
    """
    _check_bessel_args(n, x)
    if n > 0 and x < n:
        # |Y_n(x)| ~ sqrt(2/(pi n)) (e x / 2n)^{-n} for n >> x
        log_mag = -n * (math.log(x / (2.0 * n)) + 1.0)
        if log_mag > _EXP_BUDGET:
            raise SpecfunRangeError(
                f"|Y_{n}({x:.3g})| overflows double precision")
    return complex(_sp.hankel1(n, x))


def hankel_negative_order_factor(n: int) -> float:
    """Parity factor relating negative orders to the n >= 0 API: H_{-n} = (-1)^n H_n."""
    return -1.0 if n % 2 else 1.0


def zeta_tilde(rho: float) -> float:
    """Turning-point variable of the uniform Bessel asymptotics.

    Defined by (2/3)(-zt)^{3/2} = sqrt(rho^2-1) - arccos(1/rho) for rho > 1
    and (2/3) zt^{3/2} = log((1+sqrt(1-rho^2))/rho) - sqrt(1-rho^2) for
    rho < 1; continuous through rho = 1 via an analytic series in rho - 1.
    Solves -zt * (zt')^2 + 1/rho^2 = 1 with zt(1) = 0.
    """
    if not rho > 0:
        raise SpecfunRangeError("rho must be positive")
    u = rho - 1.0
    if abs(u) <= _ZETA_SERIES_WINDOW:
        acc = 0.0
        for c in reversed(_ZETA_SERIES):
            acc = acc * u + c
        return -_CBRT2 * u * acc
    if rho > 1.0:
        f = math.sqrt(rho * rho - 1.0) - math.acos(1.0 / rho)
        return -((1.5 * f) ** (2.0 / 3.0))
    g = math.log((1.0 + math.sqrt(1.0 - rho * rho)) / rho) - math.sqrt(1.0 - rho * rho)
    return (1.5 * g) ** (2.0 / 3.0)


def airy_argument_b0(rho: float) -> float:
    """First correction coefficient b0(zeta_tilde(rho)) of the uniform expansion.

    Closed forms away from rho = 1 (cancellation-prone there), Taylor series
    in rho - 1 inside the turning-point neighbourhood.
    """
    u = rho - 1.0
    if abs(u) <= _B0_SERIES_WINDOW:
        acc = 0.0
        for c in reversed(_B0_SERIES):
            acc = acc * u + c
        return acc
    zt = zeta_tilde(rho)
    if rho > 1.0:
        p = 1.0 / math.sqrt(rho * rho - 1.0)
        return -5.0 / (48.0 * zt * zt) + (3.0 * p + 5.0 * p ** 3) / (24.0 * math.sqrt(-zt))
    q = 1.0 / math.sqrt(1.0 - rho * rho)
    return -5.0 / (48.0 * zt * zt) + (5.0 * q ** 3 - 3.0 * q) / (24.0 * math.sqrt(zt))


def _quartic_prefactor(rho: float) -> float:
    """(4 zt / (1 - rho^2))^{1/4}, positive for all rho > 0."""
    u = rho - 1.0
    if abs(u) <= _ZETA_SERIES_WINDOW:
        acc = 0.0
        for c in reversed(_ZETA_SERIES):
            acc = acc * u + c
        # 4*zt/(1-rho^2) = 2^{4/3} * series / (1 + u/2)
        return (2.0 ** (4.0 / 3.0) * acc / (1.0 + 0.5 * u)) ** 0.25
    return (4.0 * zeta_tilde(rho) / (1.0 - rho * rho)) ** 0.25


def _large_order_JY(n: int, w: float) -> tuple[float, float]:
    """Leading forms J_n(w) ~ (ew/2n)^n / sqrt(2 pi n), Y_n ~ -sqrt(2/(pi n)) (ew/2n)^{-n}."""
    ln_base = n * (math.log(w / (2.0 * n)) + 1.0)
    lo = ln_base - 0.5 * math.log(2.0 * math.pi * n)
    hi = -ln_base + 0.5 * (math.log(2.0) - math.log(math.pi * n))
    j = math.exp(lo) if lo > -_EXP_BUDGET else 0.0
    y = -math.exp(hi) if hi < _EXP_BUDGET else -math.inf
    return j, y


def _uniform_core(n: int, rho: float, order: int, kind: str) -> AsymptoticValue:
    if n < 1:
        raise SpecfunRangeError("asymptotic order must be >= 1")
    if not rho > 0:
        raise SpecfunRangeError("rho must be positive")
    order = max(0, min(int(order), 2))

    if rho <= _LARGE_ORDER_RHO:
        j, y = _large_order_JY(n, n * rho)
        value = complex(j, y) if kind == "H" else complex(j)
        return AsymptoticValue(value=value, regime="large-order", err_estimate=rho)

    zt = zeta_tilde(rho)
    x = n ** (2.0 / 3.0) * zt
    pref = _quartic_prefactor(rho)
    b0 = airy_argument_b0(rho)

    if kind == "H":
        ai, dai, _, _ = _sp.airy(_ROT_MINUS * x)
        f, df = complex(ai), _ROT_MINUS * complex(dai)
        const = 2.0 * cmath.exp(-1j * math.pi / 3.0)
    else:
        ai, dai, _, _ = _sp.airy(x)
        f, df = complex(ai), complex(dai)
        const = 1.0

    lead = n ** (-1.0 / 3.0) * f
    corr = n ** (-5.0 / 3.0) * df * b0
    value = const * pref * (lead + corr if order >= 1 else lead)

    in_transition = abs(rho - 1.0) <= _TRANSITION_HALF_WIDTH * n ** (-2.0 / 3.0)
    regime = "transition" if in_transition else "uniform-airy"
    if order >= 1:
        err = max(n ** -2.0, (abs(corr) / abs(lead)) ** 2 if lead != 0 else 0.0)
    else:
        err = abs(corr) / abs(lead) if lead != 0 else n ** (-4.0 / 3.0)
    return AsymptoticValue(value=value, regime=regime, err_estimate=float(err))


def hankel_uniform(n: int, rho: float, order: int = 1) -> AsymptoticValue:
    """Uniform large-order approximation of H^{(1)}_n(n rho) for rho > 0.

    The selector covers all rho > 0: a pure large-order form for tiny rho,
    the turning-point (transition) branch for |rho-1| <= 2 n^{-2/3}, the
    Airy-uniform expansion otherwise.  ``order`` counts retained correction
    terms (0: leading; >=1: with b0), capped at the implemented ladder.
    """
    return _uniform_core(n, rho, order, "H")


def bessel_uniform(n: int, rho: float, order: int = 1) -> AsymptoticValue:
    """Uniform large-order approximation of J_n(n rho); same regimes as hankel_uniform."""
    return _uniform_core(n, rho, order, "J")
