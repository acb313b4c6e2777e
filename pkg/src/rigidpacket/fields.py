"""Plane-wave laser profiles, light-cone coordinate shifts and Rindler charts.

The laser enters through eA^μ = (0, ḟ₁(ξ), ḟ₂(ξ), 0) with ξ = ω̄(T̄ - Z̄), a
wave running along +z.  Everything is in Compton units.  The field-induced
phase is carried by

    Φ̄(ξ) = -1/(2ω̄) ∫₀^ξ [ḟ₁² + ḟ₂²] dφ ,

which multiplies e^b in the phase of a Volkov state of rapidity b.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

from .errors import DomainError, MultivaluedInverseError, QuadratureFailure, WedgeError

__all__ = [
    "FieldProfile",
    "SpacetimePoint",
    "RindlerPoint",
    "PHI_SIGN",
    "fdot",
    "phi_accumulated",
    "phi_derivative",
    "primed_coords",
    "invert_xi",
    "rindler_from_lab",
    "lab_from_rindler",
    "rigid_frame_kinematics",
]

# Sign s in the Volkov phase exp(-i(E T - p Z) - i s e^b Φ̄).  The value -1 is
# the one for which Volkov states solve the minimally coupled Dirac equation
# (checked by the residual gates in the test suite).  The primed coordinates
# follow the same sign: T' = T + sΦ̄, Z' = Z - sΦ̄.
PHI_SIGN = -1

_KINDS = ("off", "linear", "circular", "tabulated")


@dataclass(frozen=True)
class SpacetimePoint:
    Tbar: float
    Zbar: float
    Xbar: float = 0.0
    Ybar: float = 0.0

    def as_array(self):
        return np.array([self.Tbar, self.Xbar, self.Ybar, self.Zbar])


@dataclass(frozen=True)
class RindlerPoint:
    eta: float
    ubar: float

    def __post_init__(self):
        if not self.ubar > 0:
            raise WedgeError(f"ubar must be positive, got {self.ubar}")


@dataclass(frozen=True)
class FieldProfile:
    """Transverse plane-wave potential in units of the electron mass.

    ``envelope`` is None (monochromatic) or ``"sin2"``, a sin²(πξ/L) window on
    [0, L] with L = ``envelope_length``.  Tabulated profiles hold sample arrays
    ``table = (xi, f1, f2)`` interpolated by cubic splines.
    """

    kind: str = "off"
    a0: float = 0.0
    omega_bar: float = 1.0
    envelope: Optional[str] = None
    envelope_length: float = 2 * math.pi * 10
    table: Optional[tuple] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown field kind {self.kind!r}")
        if not self.omega_bar > 0:
            raise ValueError("omega_bar must be positive")
        if self.a0 < 0:
            raise ValueError("a0 must be nonnegative")
        if self.envelope not in (None, "sin2"):
            raise ValueError(f"unknown envelope {self.envelope!r}")
        if self.envelope == "sin2" and not self.envelope_length > 0:
            raise ValueError("envelope_length must be positive")
        if self.kind == "tabulated":
            if self.table is None:
                raise ValueError("tabulated profile needs a table")
            xi = np.asarray(self.table[0], dtype=float)
            if xi.ndim != 1 or xi.size < 4 or np.any(np.diff(xi) <= 0):
                raise ValueError("table abscissae must be increasing with at least 4 samples")

    @classmethod
    def from_csv(cls, path_f1, path_f2=None, omega_bar=1.0, **kw):
        """Tabulated profile from two-column CSV files (ξ, ḟ) per component."""
        d1 = np.loadtxt(path_f1, delimiter=",", ndmin=2)
        xi = d1[:, 0]
        f1 = d1[:, 1]
        if path_f2 is None:
            f2 = np.zeros_like(f1)
        else:
            d2 = np.loadtxt(path_f2, delimiter=",", ndmin=2)
            if d2.shape != d1.shape or not np.allclose(d2[:, 0], xi):
                raise ValueError("both component tables must share the same ξ samples")
            f2 = d2[:, 1]
        a0 = float(np.max(np.hypot(f1, f2)))
        return cls("tabulated", a0, omega_bar, table=(xi, f1, f2), **kw)

    @property
    def is_off(self) -> bool:
        return self.kind == "off" or (self.a0 == 0 and self.kind != "tabulated")

    @cached_property
    def _splines(self):
        xi, f1, f2 = (np.asarray(a, dtype=float) for a in self.table)
        return xi, CubicSpline(xi, f1), CubicSpline(xi, f2)

    @cached_property
    def _phi_table(self):
        # cumulative ∫ (ḟ₁²+ḟ₂²) on a fine grid, built once and then read-only
        xi, s1, s2 = self._splines
        fine = np.linspace(xi[0], xi[-1], 16 * xi.size + 1)
        spl = CubicSpline(fine, s1(fine) ** 2 + s2(fine) ** 2).antiderivative()
        return spl


def _envelope(profile, xi):
    if profile.envelope is None:
        return np.ones_like(xi)
    L = profile.envelope_length
    inside = (xi >= 0) & (xi <= L)
    return np.where(inside, np.sin(np.pi * xi / L) ** 2, 0.0)


def fdot(profile: FieldProfile, xi):
    """(ḟ₁, ḟ₂) at phase ξ; scalar or array input."""
    xi_arr = np.asarray(xi, dtype=float)
    if profile.kind == "off":
        z = np.zeros_like(xi_arr)
        return _out(z, xi), _out(z.copy(), xi)
    if profile.kind == "tabulated":
        grid, s1, s2 = profile._splines
        if np.any(xi_arr < grid[0]) or np.any(xi_arr > grid[-1]):
            raise DomainError(f"xi outside tabulated range [{grid[0]}, {grid[-1]}]")
        env = _envelope(profile, xi_arr)
        return _out(s1(xi_arr) * env, xi), _out(s2(xi_arr) * env, xi)
    env = profile.a0 * _envelope(profile, xi_arr)
    f1 = env * np.cos(xi_arr)
    f2 = env * np.sin(xi_arr) if profile.kind == "circular" else np.zeros_like(xi_arr)
    return _out(f1, xi), _out(f2, xi)


def _out(arr, like):
    return float(arr) if np.ndim(like) == 0 else arr


def phi_derivative(profile: FieldProfile, xi):
    f1, f2 = fdot(profile, xi)
    return -(np.asarray(f1) ** 2 + np.asarray(f2) ** 2) / (2 * profile.omega_bar)


def phi_accumulated(profile: FieldProfile, xi):
    """Φ̄(ξ) = -1/(2ω̄) ∫₀^ξ (ḟ₁² + ḟ₂²) dφ."""
    xi_arr = np.asarray(xi, dtype=float)
    c = -1.0 / (2 * profile.omega_bar)
    if profile.kind == "off" or (profile.a0 == 0 and profile.kind != "tabulated"):
        return _out(np.zeros_like(xi_arr), xi)
    if profile.envelope is None and profile.kind != "tabulated":
        a2 = profile.a0 ** 2
        if profile.kind == "linear":
            integral = a2 * (xi_arr / 2 + np.sin(2 * xi_arr) / 4)
        else:
            integral = a2 * xi_arr
        return _out(c * integral, xi)
    if profile.kind == "tabulated":
        grid = profile._splines[0]
        if np.any(xi_arr < grid[0]) or np.any(xi_arr > grid[-1]) or not grid[0] <= 0 <= grid[-1]:
            raise DomainError("xi (and 0) must lie inside the tabulated range")
        if profile.envelope is None:
            anti = profile._phi_table
            return _out(c * (anti(xi_arr) - anti(0.0)), xi)

    def integrand(x):
        f1, f2 = fdot(profile, x)
        return f1 * f1 + f2 * f2

    points = None
    if profile.envelope == "sin2":
        points = [0.0, profile.envelope_length]

    def one(x):
        if x == 0:
            return 0.0
        lo, hi = (0.0, x) if x > 0 else (x, 0.0)
        pts = [p for p in (points or []) if lo < p < hi] or None
        val, err, *_ = quad(integrand, lo, hi, points=pts, limit=400, epsabs=1e-13, epsrel=1e-12,
                            full_output=1)
        if err > 1e-8 * max(1.0, abs(val)):
            raise QuadratureFailure("accumulated-phase quadrature did not converge", err)
        return val if x > 0 else -val

    vals = np.vectorize(one, otypes=[float])(xi_arr)
    return _out(c * vals, xi)


def primed_coords(point: SpacetimePoint, profile: FieldProfile, sign: int = PHI_SIGN) -> SpacetimePoint:
    """Shift T̄' = T̄ + sΦ̄(ξ), Z̄' = Z̄ - sΦ̄(ξ) with ξ = ω̄(T̄ - Z̄)."""
    if profile.is_off:
        return point
    xi = profile.omega_bar * (point.Tbar - point.Zbar)
    phi = sign * phi_accumulated(profile, xi)
    return SpacetimePoint(point.Tbar + phi, point.Zbar - phi, point.Xbar, point.Ybar)


def forward_xi(profile: FieldProfile, xi, sign: int = PHI_SIGN):
    """ξ' = ξ + 2ω̄ sΦ̄(ξ), the phase seen in primed coordinates."""
    return xi + 2 * profile.omega_bar * sign * phi_accumulated(profile, xi)


def invert_xi(profile: FieldProfile, xi_prime: float, sign: int = PHI_SIGN,
              bracket_width: float | None = None, tol: float = 1e-10) -> float:
    """Solve ξ + 2ω̄ sΦ̄(ξ) = ξ' for ξ.

    Monotonicity of the forward map is checked on a sample grid over the
    search bracket; a sign change of its slope raises
    :class:`MultivaluedInverseError`.
    """
    if profile.is_off:
        return float(xi_prime)

    def g(x):
        return forward_xi(profile, x, sign) - xi_prime

    def slope(x):
        return 1 + 2 * profile.omega_bar * sign * phi_derivative(profile, x)

    width = bracket_width if bracket_width is not None else 10.0 + 2 * abs(xi_prime)
    lo, hi = -width, width
    if profile.kind == "tabulated":
        grid = profile._splines[0]
        lo, hi = max(lo, grid[0]), min(hi, grid[-1])
    for _ in range(60):
        if g(lo) <= 0 <= g(hi) or g(lo) >= 0 >= g(hi):
            break
        lo, hi = 2 * lo, 2 * hi
        if profile.kind == "tabulated":
            raise MultivaluedInverseError("no root inside the tabulated range", (lo, hi))
    else:
        raise MultivaluedInverseError("could not bracket the inverse", (lo, hi))
    samples = slope(np.linspace(lo, hi, 4001))
    if np.any(samples <= 0) and np.any(samples >= 0):
        raise MultivaluedInverseError("forward map xi -> xi' is not monotone", (lo, hi))
    if np.all(samples <= 0) and np.any(samples == 0):
        raise MultivaluedInverseError("forward map xi -> xi' is degenerate", (lo, hi))
    x = brentq(g, lo, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=200)
    # polish with a Newton step
    for _ in range(3):
        d = slope(x)
        if d == 0:
            break
        x -= g(x) / d
    if abs(g(x)) >= tol * max(1.0, abs(xi_prime)):
        raise MultivaluedInverseError(f"inverse residual {abs(g(x)):.2e} above tolerance", (lo, hi))
    return float(x)


def rindler_from_lab(point: SpacetimePoint) -> RindlerPoint:
    """(T̄, Z̄) → (η, ū) with T̄ = ū sinh η, Z̄ = ū cosh η (right wedge)."""
    T, Z = point.Tbar, point.Zbar
    if not (Z > 0 and Z > abs(T)):
        raise WedgeError(f"({T}, {Z}) is not inside the right Rindler wedge")
    tp, tm = Z + T, Z - T
    return RindlerPoint(0.5 * math.log(tp / tm), math.sqrt(tp * tm))


def lab_from_rindler(point: RindlerPoint) -> SpacetimePoint:
    return SpacetimePoint(point.ubar * math.sinh(point.eta), point.ubar * math.cosh(point.eta))


def rigid_frame_kinematics(g: float, z: float, T: float) -> dict:
    """Velocity and proper-time rate of the rigid-frame reference point at height z."""
    lever = 1 + g * z
    if lever <= 0:
        raise DomainError("point lies beyond the Rindler horizon (1 + g z <= 0)")
    v = g * T / math.hypot(lever, g * T)
    return {"v_over_c": v, "proper_time_factor": lever}
