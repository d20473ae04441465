"""Exterior-cylinder geometry and the closed-form phase objects.

Points live outside the unit cylinder in cylindrical coordinates (r, theta, z)
with the source on the theta = 0 ray at (s, 0, 0).  The normal-coordinate
view is x = r - 1, y = pi/2 - theta, in which the planar distance from
(x, y) to the source reads phi(x, y, z, s) = sqrt((1+x)^2 - 2 s (1+x) sin y
+ s^2 + z^2).

The module collects: distances, the apparent contour, the pair of angular
critical points y±, the folded critical values Gamma0 / Gamma~ (the smooth
data of the cubic normal form at a degenerate angular critical point), the
eikonal residuals of the tangential/Airy phase pair, the two-point boundary
phase with its analytic Hessian, and the dyadic cutoff system.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .specfun import zeta_tilde

__all__ = [
    "DomainError",
    "CylPoint",
    "SourceConfig",
    "HessianReport",
    "CutoffSystem",
    "dist_cyl",
    "phi_normal",
    "apparent_contour",
    "critical_points_ypm",
    "gamma0",
    "gamma_tilde",
    "eikonal_residual",
    "boundary_phase",
    "boundary_phase_gradient",
    "boundary_phase_hessian",
    "newton_critical_point",
    "critical_z_for_theta",
    "classify_critical_point",
    "hessian_det_closed_form",
    "make_cutoffs",
    "j_split",
]

TWO_PI = 2.0 * math.pi


class DomainError(ValueError):
    """Geometric argument outside the exterior domain or formula range."""


@dataclass(frozen=True)
class CylPoint:
    """Point of the closed exterior domain, r >= 1, theta in [0, 2pi)."""

    r: float
    theta: float
    z: float

    def __post_init__(self):
        if not self.r >= 1.0:
            raise DomainError(f"r = {self.r} is inside the cylinder")
        object.__setattr__(self, "theta", self.theta % TWO_PI)

    @property
    def x(self) -> float:
        return self.r - 1.0

    @property
    def y(self) -> float:
        return math.pi / 2.0 - self.theta

    def to_cartesian(self) -> tuple[float, float, float]:
        return (self.r * math.cos(self.theta), self.r * math.sin(self.theta), self.z)


@dataclass(frozen=True)
class SourceConfig:
    """Source location (s, 0, 0), s >= 1."""

    s: float

    def __post_init__(self):
        if not self.s >= 1.0:
            raise DomainError(f"s = {self.s} is inside the cylinder")


def dist_cyl(Q: CylPoint, Q0: SourceConfig) -> float:
    """Euclidean distance sqrt(r^2 - 2 s r cos(theta) + s^2 + z^2)."""
    return math.sqrt(Q.r * Q.r - 2.0 * Q0.s * Q.r * math.cos(Q.theta)
                     + Q0.s * Q0.s + Q.z * Q.z)


def phi_normal(x: float, y: float, z: float, s: float) -> float:
    """Distance in normal coordinates: sqrt((1+x)^2 - 2 s (1+x) sin y + s^2 + z^2)."""
    r = 1.0 + x
    return math.sqrt(r * r - 2.0 * s * r * math.sin(y) + s * s + z * z)


def apparent_contour(s: float) -> tuple[float, float]:
    """Tangency angles of rays from the source: theta* = arccos(1/s), y* = arcsin(1/s)."""
    if s <= 1.0:
        raise DomainError("apparent contour degenerates at s = 1")
    return math.acos(1.0 / s), math.asin(1.0 / s)


def critical_points_ypm(x: float, alpha_t: float, s: float) -> tuple[float, float]:
    """Angular critical points y± of y -> y alpha_t + phi(x, y, 0, s).

    s(1+x) sin(y±) = alpha_t^2 ± sqrt(s^2 - alpha_t^2) sqrt((1+x)^2 - alpha_t^2);
    there phi(x, y±, 0, s) = sqrt(s^2 - alpha_t^2) ∓ sqrt((1+x)^2 - alpha_t^2).
    """
    rr = 1.0 + x
    if not (0.0 < alpha_t <= rr <= s):
        raise DomainError("need 0 < alpha_t <= 1 + x <= s for real critical points")
    root = math.sqrt(s * s - alpha_t ** 2) * math.sqrt(rr * rr - alpha_t ** 2)
    base = alpha_t ** 2
    y_plus = math.asin((base + root) / (s * rr))
    y_minus = math.asin((base - root) / (s * rr))
    return y_plus, y_minus


def gamma0(alpha_t: float, s: float) -> float:
    """Common critical value Gamma0 of the folded angular phase at x = 0.

    Gamma0 = ((y+ + y-) alpha_t + phi(0,y+,0,s) + phi(0,y-,0,s)) / 2 for
    alpha_t <= 1; continued through alpha_t = 1 by the even dependence of
    y+ + y- on sqrt(1 - alpha_t^2) (the two critical points turn complex
    conjugate, their arcsin sum stays real).
    """
    if not s > 1.0:
        raise DomainError("need s > 1")
    if not 0.0 < alpha_t < s:
        raise DomainError("need 0 < alpha_t < s")
    if alpha_t <= 1.0:
        y_plus, y_minus = critical_points_ypm(0.0, alpha_t, s)
        phi_plus_v = math.sqrt(s * s - alpha_t ** 2) - math.sqrt(1.0 - alpha_t ** 2)
        phi_minus_v = math.sqrt(s * s - alpha_t ** 2) + math.sqrt(1.0 - alpha_t ** 2)
        return 0.5 * ((y_plus + y_minus) * alpha_t + phi_plus_v + phi_minus_v)
    root = cmath.sqrt(1.0 - alpha_t ** 2) * cmath.sqrt(1.0 - (alpha_t / s) ** 2)
    z_plus = alpha_t ** 2 / s + root
    half_sum = cmath.asin(z_plus).real
    return half_sum * alpha_t + math.sqrt(s * s - alpha_t ** 2)


def gamma_tilde(alpha_t: float, r: float, y_Q: float) -> float:
    """Critical-value data of the observer-side phase: -(y_Q + pi/2) alpha_t + Gamma0(alpha_t, r)."""
    return -(y_Q + math.pi / 2.0) * alpha_t + gamma0(alpha_t, r)


def _fd1(f: Callable[[float], float], x: float) -> float:
    """Richardson-extrapolated central first difference, step 1e-5 (1+|x|)."""
    h = 1e-5 * (1.0 + abs(x))
    d1 = (f(x + h) - f(x - h)) / (2.0 * h)
    d2 = (f(x + 0.5 * h) - f(x - 0.5 * h)) / h
    return (4.0 * d2 - d1) / 3.0


def eikonal_residual(x: float, y: float, z: float, alpha: float,
                     gamma: float) -> tuple[float, float]:
    """Residuals of the two eikonal equations for the pair (iota, zeta).

    iota = y alpha + z gamma and zeta = alpha^{2/3} zt((1+x) sqrt(1-gamma^2)
    / alpha) are plugged into
        |d iota|_g^2 - zeta |d zeta|_g^2 = 1,   <d iota, d zeta>_g = 0,
    with the cylindrical metric weight 1/(1+x)^2 on the y-component and the
    x-derivative of zeta taken by finite differences.
    """
    if not alpha > 0:
        raise DomainError("need alpha > 0")
    if not gamma * gamma < 1.0:
        raise DomainError("need gamma^2 < 1")
    rr = 1.0 + x
    croot = math.sqrt(1.0 - gamma * gamma)

    def zeta_of_x(xv: float) -> float:
        return alpha ** (2.0 / 3.0) * zeta_tilde((1.0 + xv) * croot / alpha)

    zeta = zeta_of_x(x)
    dz_x = _fd1(zeta_of_x, x)
    # iota is linear: d iota = (0, alpha, gamma); zeta depends on x only
    grad_iota_sq = (alpha / rr) ** 2 + gamma * gamma
    res1 = grad_iota_sq - zeta * dz_x * dz_x - 1.0
    res2 = 0.0 * dz_x  # <d iota, d zeta> has no overlapping components
    return res1, res2


# ------------------------------------------------------ two-point boundary phase

def _tphi(theta: float, z: float, a: float) -> float:
    """Distance from the boundary point (1, theta, z) to (a, 0, 0)."""
    return math.sqrt(1.0 - 2.0 * a * math.cos(theta) + a * a + z * z)


def boundary_phase(theta: float, z: float, Q: CylPoint, Q0: SourceConfig) -> float:
    """Two-point phase |P - Q| + |P - Q0| at the boundary point P = (1, theta, z)."""
    return (_tphi(theta - Q.theta, z - Q.z, Q.r) + _tphi(theta, z, Q0.s))


def boundary_phase_gradient(theta: float, z: float, Q: CylPoint,
                            Q0: SourceConfig) -> tuple[float, float]:
    f1 = _tphi(theta, z, Q0.s)
    f2 = _tphi(theta - Q.theta, z - Q.z, Q.r)
    dth = Q0.s * math.sin(theta) / f1 + Q.r * math.sin(theta - Q.theta) / f2
    dz = z / f1 + (z - Q.z) / f2
    return dth, dz


@dataclass(frozen=True)
class HessianReport:
    """Analytic second derivatives of the boundary phase at a critical point."""

    d2_zz: float
    d2_tz: float
    d2_tt: float
    det: float
    fd_residual: float


def boundary_phase_hessian(theta: float, z: float, Q: CylPoint,
                           Q0: SourceConfig) -> HessianReport:
    """Closed-form Hessian of the boundary phase, specialized at a critical point.

    The zz and theta-z entries use the critical-point reductions (they are
    exact only where grad Phi = 0); the theta-theta entry is the general
    formula.  fd_residual is the largest deviation from Richardson central
    differences of the full phase at the supplied point.
    """
    s, r = Q0.s, Q.r
    f1 = _tphi(theta, z, s)
    f2 = _tphi(theta - Q.theta, z - Q.z, r)
    A = 1.0 / f1 + 1.0 / f2
    d2_zz = A * (1.0 - (z / f1) ** 2)
    d2_tz = -A * z * s * math.sin(theta) / (f1 * f1)
    d2_tt = (s * math.cos(theta) / f1 - (s * math.sin(theta)) ** 2 / f1 ** 3
             + r * math.cos(theta - Q.theta) / f2
             - (r * math.sin(theta - Q.theta)) ** 2 / f2 ** 3)
    det = d2_zz * d2_tt - d2_tz * d2_tz

    def fd2(fa: Callable[[float, float], float], i: int, j: int) -> float:
        # second differences need a fatter step than first ones: roundoff
        # grows like eps/h^2, so h ~ 2e-4 balances it against truncation
        hth = 2e-4 * (1.0 + abs(theta))
        hz = 2e-4 * (1.0 + abs(z))
        def one(ht, hzz):
            if i == j:
                h = ht if i == 0 else hzz
                pts = [(theta + h, z), (theta, z), (theta - h, z)] if i == 0 else \
                      [(theta, z + h), (theta, z), (theta, z - h)]
                return (fa(*pts[0]) - 2 * fa(*pts[1]) + fa(*pts[2])) / (h * h)
            return (fa(theta + ht, z + hzz) - fa(theta + ht, z - hzz)
                    - fa(theta - ht, z + hzz) + fa(theta - ht, z - hzz)) / (4 * ht * hzz)
        coarse = one(hth, hz)
        fine = one(0.5 * hth, 0.5 * hz)
        return (4.0 * fine - coarse) / 3.0

    phi = lambda t, zz: boundary_phase(t, zz, Q, Q0)
    resid = max(abs(d2_tt - fd2(phi, 0, 0)),
                abs(d2_zz - fd2(phi, 1, 1)),
                abs(d2_tz - fd2(phi, 0, 1)))
    return HessianReport(d2_zz=d2_zz, d2_tz=d2_tz, d2_tt=d2_tt, det=det,
                         fd_residual=resid)


def critical_z_for_theta(theta: float, Q: CylPoint, Q0: SourceConfig) -> float:
    """Unique z with d_z Phi = 0 at fixed theta: z_Q psi_1/(psi_1 + psi_2)."""
    psi1 = math.sqrt(1.0 - 2.0 * Q0.s * math.cos(theta) + Q0.s ** 2)
    psi2 = math.sqrt(1.0 - 2.0 * Q.r * math.cos(theta - Q.theta) + Q.r ** 2)
    return Q.z * psi1 / (psi1 + psi2)


def newton_critical_point(Q: CylPoint, Q0: SourceConfig,
                          theta0: float | None = None, z0: float | None = None,
                          tol: float = 1e-12, max_iter: int = 80) -> tuple[float, float]:
    """Damped Newton on grad Phi = 0 with backtracking on |grad|^2.

    Default start: geometric midpoint angle with the fiberwise-critical z.
    Raises DomainError if the iteration stalls above tolerance.
    """
    th = Q.theta / 2.0 if theta0 is None else theta0
    zz = critical_z_for_theta(th, Q, Q0) if z0 is None else z0
    for _ in range(max_iter):
        g = np.array(boundary_phase_gradient(th, zz, Q, Q0))
        gn = float(np.hypot(*g))
        if gn < tol:
            return th, zz
        h = 1e-6 * (1.0 + abs(th) + abs(zz))
        jac = np.empty((2, 2))
        for k, (dt, dz) in enumerate([(h, 0.0), (0.0, h)]):
            gp = np.array(boundary_phase_gradient(th + dt, zz + dz, Q, Q0))
            gm = np.array(boundary_phase_gradient(th - dt, zz - dz, Q, Q0))
            jac[:, k] = (gp - gm) / (2.0 * h)
        try:
            step = np.linalg.solve(jac, -g)
        except np.linalg.LinAlgError:
            raise DomainError("singular Hessian in Newton iteration")
        lam = 1.0
        for _ in range(30):
            g_new = np.array(boundary_phase_gradient(th + lam * step[0],
                                                     zz + lam * step[1], Q, Q0))
            if float(np.hypot(*g_new)) < gn:
                break
            lam *= 0.5
        th += lam * step[0]
        zz += lam * step[1]
    g = boundary_phase_gradient(th, zz, Q, Q0)
    if math.hypot(*g) < 1e-9:
        return th, zz
    raise DomainError("Newton iteration did not converge")


def classify_critical_point(theta: float, z: float, Q: CylPoint,
                            Q0: SourceConfig) -> str:
    """Sign regime at the critical point: 'different-signs', 'illuminated' or 'shadow'.

    At any critical point (s cos(theta)-1)/f1 = ±(r cos(theta-theta_Q)-1)/f2;
    'illuminated'/'shadow' label the same-sign cases (P visible from both /
    from neither endpoint).
    """
    f1 = _tphi(theta, z, Q0.s)
    f2 = _tphi(theta - Q.theta, z - Q.z, Q.r)
    u1 = (Q0.s * math.cos(theta) - 1.0) / f1
    u2 = (Q.r * math.cos(theta - Q.theta) - 1.0) / f2
    if u1 * u2 < 0:
        return "different-signs"
    return "illuminated" if u1 > 0 else "shadow"


def hessian_det_closed_form(theta: float, z: float, Q: CylPoint,
                            Q0: SourceConfig) -> float:
    """Determinant of the boundary-phase Hessian at a critical point, closed form.

    different-signs: A^2 (s cos(theta) - 1)^2 / f1^2;
    same sign:      A u (u A ± 2 psi1^2/f1^2) with u = (s cos(theta)-1)/f1,
    the + sign in the illuminated case, rewritten from the shadow-regime
    bound's absolute-value form.
    """
    s, r = Q0.s, Q.r
    f1 = _tphi(theta, z, s)
    f2 = _tphi(theta - Q.theta, z - Q.z, r)
    A = 1.0 / f1 + 1.0 / f2
    u1 = (s * math.cos(theta) - 1.0) / f1
    regime = classify_critical_point(theta, z, Q, Q0)
    if regime == "different-signs":
        return A * A * u1 * u1
    psi1_sq = 1.0 - 2.0 * s * math.cos(theta) + s * s
    return A * u1 * (u1 * A + 2.0 * psi1_sq / (f1 * f1))


# ----------------------------------------------------------------- cutoffs

def _smoothstep(x, order: int):
    x = np.clip(x, 0.0, 1.0)
    if order <= 2:
        return x ** 3 * (10.0 - 15.0 * x + 6.0 * x * x)
    return x ** 5 * (126.0 - 420.0 * x + 540.0 * x * x
                     - 315.0 * x ** 3 + 70.0 * x ** 4)


class CutoffSystem:
    """The dyadic cutoff family psi0, psi, psi_j, chi, chi0, chi_eps.

    psi0 is a smooth monotone step equal to 1 for beta >= 1/2 and 0 for
    beta <= 0.26; psi(beta) = psi0(beta) - psi0(beta/4) is supported in
    (1/4, 4), equal to 1 on [1/2, 1.04], and the telescoping identity
    psi0(beta) + sum_{j=1..J} psi(4^j beta) = psi0(4^J beta) makes the
    partition of unity exact by construction.  The support endpoints differ
    from the customary narrower low-pass window: with psi constrained to
    (1/4, 4) and the partition exact, the step of psi0 must sit inside
    (1/4, 1).  All cutoffs are C^2 or C^4 smoothstep composites with exact
    support endpoints, valued in [0, 1].
    """

    _LO = 0.26
    _HI = 0.50

    def __init__(self, eps: float, smoothness: str = "c4"):
        if not 0.0 < eps <= 0.1:
            raise DomainError("need 0 < eps <= 0.1")
        if smoothness not in ("c2", "c4"):
            raise DomainError("smoothness must be 'c2' or 'c4'")
        self.eps = float(eps)
        self.smoothness = smoothness
        self._order = 2 if smoothness == "c2" else 4
        self._log_lo = math.log(self._LO)
        self._log_w = math.log(self._HI) - math.log(self._LO)

    def _shape(self, beta, out):
        return out if np.asarray(beta).ndim else float(out[0])

    def _psi0_arr(self, arr: np.ndarray) -> np.ndarray:
        out = np.zeros_like(arr)
        pos = arr > 0
        t = (np.log(arr[pos]) - self._log_lo) / self._log_w
        out[pos] = _smoothstep(t, self._order)
        return out

    def psi0(self, beta):
        arr = np.atleast_1d(np.asarray(beta, dtype=float))
        return self._shape(beta, self._psi0_arr(arr))

    def psi(self, beta):
        arr = np.atleast_1d(np.asarray(beta, dtype=float))
        return self._shape(beta, self._psi0_arr(arr) - self._psi0_arr(arr / 4.0))

    def psi_j(self, j: int, beta):
        """psi(4^j beta) for j >= 1; psi0(beta) for j = 0."""
        if j == 0:
            return self.psi0(beta)
        return self.psi(np.asarray(beta, dtype=float) * 4.0 ** j)

    def chi(self, x):
        arr = np.atleast_1d(np.asarray(x, dtype=float))
        rise = _smoothstep((arr - 0.5) / 0.25, self._order)
        fall = 1.0 - _smoothstep((arr - 1.5) / 0.5, self._order)
        return self._shape(x, rise * fall)

    def chi0(self, x):
        arr = np.atleast_1d(np.asarray(x, dtype=float))
        return self._shape(x, 1.0 - _smoothstep((np.abs(arr) - 1.5) / 0.5, self._order))

    def chi_eps(self, x):
        return self.chi0((np.asarray(x, dtype=float) - 1.0) / self.eps)


def make_cutoffs(eps: float = 0.05, smoothness: str = "c4") -> CutoffSystem:
    """Build the immutable cutoff system with glancing half-width eps."""
    return CutoffSystem(eps=eps, smoothness=smoothness)


def j_split(s: float, h: float) -> int:
    """sup{ j : 2^{-3j} s/h >= 1 } = floor(log2(s/h)/3), 0 when h >= s."""
    if not (0.0 < h < 1.0):
        raise DomainError("need 0 < h < 1")
    if not s >= 1.0:
        raise DomainError("need s >= 1")
    if h >= s:
        return 0
    return int(math.floor((math.log2(s / h) + 1e-12) / 3.0))
