"""Spinor constructors: Rindler eigenstates, nonspreading packets (free and
laser-dressed), Volkov states and the pointwise transformation to the rest frame.

The packets are superpositions over rapidity b of boosted spin-up plane waves
with the envelope e^{-ā cosh b} and a chirp e^{iαb}:

    ψ(T, Z) = ∫ db e^{iαb} e^{-ā cosh b} (e^{-b/2}, 0, e^{b/2}, 0) e^{-i(T cosh b - Z sinh b)}.

Writing num = ā + i(T + Z), den = ā + i(T - Z), X = √num √den (Re X > 0) and
L = Log num - Log den, the integral is

    ψ = (F_{iα-1/2}, 0, F_{iα+1/2}, 0),     F_ν = 2 e^{νL/2} K_ν(X).

All evaluations return plain complex arrays; the ``*_scaled`` variants return
a mantissa and a common log scale for points where the magnitudes leave the
double range.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from . import algebra
from .algebra import boost_z, inv4
from .errors import DomainError, MaskedPointError, NoDampingError, WedgeError
from .fields import (
    PHI_SIGN,
    FieldProfile,
    RindlerPoint,
    SpacetimePoint,
    fdot,
    phi_accumulated,
    primed_coords,
)
from .specfun import DEFAULT_SPEC, NEAR_SINGULAR_RADIUS, QuadratureSpec, bessel_k_scaled

__all__ = [
    "PacketParams",
    "ZetaArg",
    "COMPONENT_ORDER",
    "OMEGA_SIGN",
    "packet_zeta",
    "bessel_pair",
    "rindler_eigenstate",
    "rindler_eigenstate_scaled",
    "free_nonspreading",
    "free_nonspreading_scaled",
    "volkov",
    "volkov_integrand",
    "laser_nonspreading",
    "CRDI",
    "crdi_transform",
    "crdi_matrix",
    "eta_prime_trace_form",
    "rest_frame_spinor",
    "lab_from_rest",
    "Decomposition",
    "decompose_boost_rotation",
    "null_rotation",
]

# (F_{iα-1/2}, 0, F_{iα+1/2}, 0) solves the free Dirac equation; the reversed
# order does not (see the residual tests).
COMPONENT_ORDER = "minus_first"
_ORDERS = ("minus_first", "plus_first")

# A packet with chirp α approaches the Rindler eigenstate of energy Ω = OMEGA_SIGN·α
# in the limit ā → 0.
OMEGA_SIGN = -1

# relative size of |F_{iα-1/2}| below which the rest-frame map is undefined
_BESSEL_ZERO_MASK = 1e-12


@dataclass(frozen=True)
class PacketParams:
    alpha: float = 0.0
    abar: float = 1.0
    Omega: float | None = None

    def __post_init__(self):
        if not self.abar > 0:
            raise NoDampingError(f"packet size parameter must satisfy abar > 0, got {self.abar}")
        if not (math.isfinite(self.alpha) and math.isfinite(self.abar)):
            raise DomainError("alpha and abar must be finite")

    @property
    def omega(self) -> float:
        """Rindler energy paired with this packet."""
        return self.Omega if self.Omega is not None else OMEGA_SIGN * self.alpha


@dataclass(frozen=True)
class ZetaArg:
    """Argument of the Bessel functions of a packet at one spacetime point."""

    value: complex
    log_ratio: complex
    branch_tag: str = "sqrt(num)*sqrt(den), Re>0"

    @property
    def near_singular(self) -> bool:
        return abs(self.value) < NEAR_SINGULAR_RADIUS


def packet_zeta(abar: float, Tbar: float, Zbar: float) -> ZetaArg:
    num = complex(abar, Tbar + Zbar)
    den = complex(abar, Tbar - Zbar)
    X = cmath.sqrt(num) * cmath.sqrt(den)
    L = cmath.log(num) - cmath.log(den)
    return ZetaArg(X, L)


def bessel_pair(alpha: float, abar: float, Tbar: float, Zbar: float,
                spec: QuadratureSpec = DEFAULT_SPEC, mask_near_singular: bool = True):
    """(F_{iα-1/2}, F_{iα+1/2}) as mantissas with a shared log scale.

    Points with |ζ̄| below the near-singular radius raise MaskedPointError
    unless ``mask_near_singular`` is False; integrals over a slice that stays
    off ζ̄ = 0 use that to keep the small-|ζ̄| part of their integrand.
    """
    z = packet_zeta(abar, Tbar, Zbar)
    if z.near_singular and mask_near_singular:
        raise MaskedPointError("packet evaluated on the light cone (|zeta| < 1e-6)",
                               (Tbar, Zbar))
    logs = []
    mants = []
    for half in (-0.5, 0.5):
        nu = complex(half, alpha)
        m, s = bessel_k_scaled(nu, z.value, spec)
        mants.append(2 * m)
        logs.append(s + nu * z.log_ratio / 2)
    scale = max(l.real for l in logs)
    vals = [m * cmath.exp(l - scale) for m, l in zip(mants, logs)]
    return vals[0], vals[1], scale


def _arrange(Fm, Fp, ordering):
    if ordering not in _ORDERS:
        raise ValueError(f"ordering must be one of {_ORDERS}")
    return (Fm, Fp) if ordering == "minus_first" else (Fp, Fm)


def _unscale(vec, scale):
    return np.asarray(vec, dtype=complex) * math.exp(scale)


# ---------------------------------------------------------------------------
# Rindler eigenstate
# ---------------------------------------------------------------------------

_CHIRAL_QUARTER = np.exp(-1j * math.pi / 4 * np.array([1, 1, -1, -1]))


def rindler_eigenstate_scaled(Omega: float, point: RindlerPoint, spec: QuadratureSpec = DEFAULT_SPEC):
    if not point.ubar > 0:
        raise WedgeError("ubar must be positive")
    mp, sp = bessel_k_scaled(complex(0.5, Omega), point.ubar, spec)
    mm, sm = bessel_k_scaled(complex(-0.5, Omega), point.ubar, spec)
    scale = max(sp, sm) + math.pi * Omega / 2
    pref = 2 * math.sqrt(2) / (1j * math.pi) * cmath.exp(-1j * Omega * point.eta)
    vec = np.array([mp * math.exp(sp - max(sp, sm)), 0, mm * math.exp(sm - max(sp, sm)), 0])
    return pref * _CHIRAL_QUARTER * vec, scale


def rindler_eigenstate(Omega: float, point: RindlerPoint, spec: QuadratureSpec = DEFAULT_SPEC):
    """Eigenstate of the accelerated-frame Dirac operator with Rindler energy Ω.

    (2√2/(iπ)) e^{πΩ/2} e^{iγ⁵π/4} (K_{iΩ+1/2}(ū), 0, K_{iΩ-1/2}(ū), 0) e^{-iΩη}
    """
    vec, scale = rindler_eigenstate_scaled(Omega, point, spec)
    return _unscale(vec, scale)


# ---------------------------------------------------------------------------
# free packet
# ---------------------------------------------------------------------------

def free_nonspreading_scaled(params: PacketParams, point: SpacetimePoint,
                             ordering: str = COMPONENT_ORDER, spec: QuadratureSpec = DEFAULT_SPEC):
    Fm, Fp, scale = bessel_pair(params.alpha, params.abar, point.Tbar, point.Zbar, spec)
    first, third = _arrange(Fm, Fp, ordering)
    return np.array([first, 0, third, 0], dtype=complex), scale


def free_nonspreading(params: PacketParams, point: SpacetimePoint,
                      ordering: str = COMPONENT_ORDER, spec: QuadratureSpec = DEFAULT_SPEC):
    """Closed-form free nonspreading packet at a lab point."""
    vec, scale = free_nonspreading_scaled(params, point, ordering, spec)
    return _unscale(vec, scale)


# ---------------------------------------------------------------------------
# Volkov states and the laser-dressed packet
# ---------------------------------------------------------------------------

def volkov_integrand(b, profile: FieldProfile, point: SpacetimePoint, sign: int = PHI_SIGN):
    """Volkov spinors for an array of (possibly complex) rapidities, shape (n, 4)."""
    b = np.atleast_1d(np.asarray(b, dtype=complex))
    xi = profile.omega_bar * (point.Tbar - point.Zbar)
    f1, f2 = fdot(profile, xi)
    phi = phi_accumulated(profile, xi)
    f = complex(f1, f2)
    eh = np.exp(0.5 * b)
    spin = np.stack([1 / eh, f * eh, eh, np.zeros_like(b)], axis=-1)
    phase = -1j * (np.cosh(b) * point.Tbar - np.sinh(b) * point.Zbar) - 1j * sign * np.exp(b) * phi
    return spin * np.exp(phase)[:, None]


def volkov(b: float, profile: FieldProfile, point: SpacetimePoint, sign: int = PHI_SIGN):
    """Volkov state of rapidity b in the plane wave ``profile`` (spin up, p along z)."""
    return volkov_integrand(b, profile, point, sign)[0]


def laser_nonspreading_scaled(params: PacketParams, profile: FieldProfile, point: SpacetimePoint,
                              sign: int = PHI_SIGN, ordering: str = COMPONENT_ORDER,
                              spec: QuadratureSpec = DEFAULT_SPEC):
    pp = primed_coords(point, profile, sign)
    Fm, Fp, scale = bessel_pair(params.alpha, params.abar, pp.Tbar, pp.Zbar, spec)
    f1, f2 = fdot(profile, profile.omega_bar * (point.Tbar - point.Zbar))
    first, third = _arrange(Fm, Fp, ordering)
    return np.array([first, complex(f1, f2) * Fp, third, 0], dtype=complex), scale


def laser_nonspreading(params: PacketParams, profile: FieldProfile, point: SpacetimePoint,
                       sign: int = PHI_SIGN, ordering: str = COMPONENT_ORDER,
                       spec: QuadratureSpec = DEFAULT_SPEC):
    """Nonspreading packet dressed by a plane wave: (F₋, (ḟ₁+iḟ₂)F₊, F₊, 0) at primed coordinates."""
    vec, scale = laser_nonspreading_scaled(params, profile, point, sign, ordering, spec)
    return _unscale(vec, scale)


# ---------------------------------------------------------------------------
# transformation to the rest frame
# ---------------------------------------------------------------------------

def null_rotation(c: complex) -> np.ndarray:
    """Unit-triangular spinor map with lower-left parameter c (a null rotation)."""
    m = np.eye(4, dtype=complex)
    m[1, 0] = c
    m[2, 3] = -np.conj(c)
    return m


@dataclass(frozen=True)
class CRDI:
    R: np.ndarray
    eta_prime: float
    c: complex
    Fm: complex
    Fp: complex
    log_scale: float
    primed: SpacetimePoint
    f: complex


def crdi_transform(params: PacketParams, profile: FieldProfile, point: SpacetimePoint,
                   sign: int = PHI_SIGN, spec: QuadratureSpec = DEFAULT_SPEC) -> CRDI:
    """R̄ = boost_z(η') · N(c) mapping the lab spinor to its local rest frame.

    N(c) removes the field-induced second component, c = -(ḟ₁+iḟ₂) F₊/F₋,
    and the boost with η' = ln|F₊/F₋| equalizes the two remaining components,
    which makes the spatial current vanish.
    """
    pp = primed_coords(point, profile, sign)
    Fm, Fp, scale = bessel_pair(params.alpha, params.abar, pp.Tbar, pp.Zbar, spec)
    big = max(abs(Fm), abs(Fp))
    if abs(Fm) < _BESSEL_ZERO_MASK * big or abs(Fp) < _BESSEL_ZERO_MASK * big:
        raise MaskedPointError("rest-frame map undefined near a Bessel zero", (point.Tbar, point.Zbar))
    f1, f2 = fdot(profile, profile.omega_bar * (point.Tbar - point.Zbar))
    f = complex(f1, f2)
    c = -f * Fp / Fm
    eta_p = math.log(abs(Fp)) - math.log(abs(Fm))
    R = boost_z(eta_p) @ null_rotation(c)
    return CRDI(R, eta_p, c, Fm, Fp, scale, pp, f)


def crdi_matrix(params: PacketParams, profile: FieldProfile, point: SpacetimePoint,
                sign: int = PHI_SIGN, spec: QuadratureSpec = DEFAULT_SPEC) -> np.ndarray:
    return crdi_transform(params, profile, point, sign, spec).R


def eta_prime_trace_form(params: PacketParams, profile: FieldProfile, point: SpacetimePoint,
                         sign: int = PHI_SIGN, spec: QuadratureSpec = DEFAULT_SPEC) -> complex:
    """η' from ½ ln(q K_{1/2-iα}(X*) K_{1/2+iα}(X) / (K_{1/2-iα}(X) K_{1/2+iα}(X*))).

    q = |num|/|den|.  This is an independent route to ln|F₊/F₋|; the returned
    value is complex so callers can check that its imaginary part vanishes.
    """
    pp = primed_coords(point, profile, sign)
    z = packet_zeta(params.abar, pp.Tbar, pp.Zbar)
    X = z.value
    a = params.alpha
    q = abs(complex(params.abar, pp.Tbar + pp.Zbar)) / abs(complex(params.abar, pp.Tbar - pp.Zbar))
    logk = 0j
    for nu, arg, sgn in ((0.5 - 1j * a, X.conjugate(), 1), (0.5 + 1j * a, X, 1),
                         (0.5 - 1j * a, X, -1), (0.5 + 1j * a, X.conjugate(), -1)):
        m, s = bessel_k_scaled(nu, arg, spec)
        logk += sgn * (cmath.log(m) + s)
    return 0.5 * (math.log(q) + logk)


def rest_frame_spinor(params: PacketParams, profile: FieldProfile, point: SpacetimePoint,
                      sign: int = PHI_SIGN, spec: QuadratureSpec = DEFAULT_SPEC):
    """ψ̄_R = R̄ ψ_L; its spatial current vanishes identically."""
    t = crdi_transform(params, profile, point, sign, spec)
    psi = np.array([t.Fm, t.f * t.Fp, t.Fp, 0], dtype=complex)
    return _unscale(t.R @ psi, t.log_scale)


def lab_from_rest(params: PacketParams, profile: FieldProfile, point: SpacetimePoint,
                  ordering: str = COMPONENT_ORDER, sign: int = PHI_SIGN,
                  spec: QuadratureSpec = DEFAULT_SPEC):
    """Map the rest-frame spinor boost_z(η')·(F, 0, F', 0) back with R̄⁻¹.

    ``ordering`` selects which of F_{iα∓1/2} is placed first in the rest-frame
    spinor; with ``"minus_first"`` the round trip reproduces the lab packet.
    """
    t = crdi_transform(params, profile, point, sign, spec)
    first, third = _arrange(t.Fm, t.Fp, ordering)
    rest = boost_z(t.eta_prime) @ np.array([first, 0, third, 0], dtype=complex)
    return _unscale(inv4(t.R) @ rest, t.log_scale)


# ---------------------------------------------------------------------------
# boost/rotation decomposition of the field part
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Decomposition:
    theta: float
    w: float
    V: tuple
    U: np.ndarray
    B: np.ndarray
    proper_velocity: np.ndarray
    gamma: float
    beta: tuple


def _expm_bivector(M, angle):
    # M squares to ±1 for the unit bivectors used here
    sq = M @ M
    if np.allclose(sq, -np.eye(4)):
        return math.cos(angle) * np.eye(4) + math.sin(angle) * M
    if np.allclose(sq, np.eye(4)):
        return math.cosh(angle) * np.eye(4) + math.sinh(angle) * M
    raise ValueError("generator must square to ±1")


def decompose_boost_rotation(profile: FieldProfile, xi: float) -> Decomposition:
    """Rotation U about the axis (ḟ₁, ḟ₂) and boost B with U·B = N(ḟ₁ + iḟ₂).

    θ = atan(|ḟ|/2), w = atanh(sin θ), V = (ḟ₁cosθ/|ḟ|, ḟ₂cosθ/|ḟ|, sinθ).
    The proper velocity is the image of the rest four-velocity under B.
    """
    f1, f2 = fdot(profile, xi)
    F = math.hypot(f1, f2)
    G = algebra.GAMMA
    if F == 0:
        eye = np.eye(4, dtype=complex)
        return Decomposition(0.0, 0.0, (0.0, 0.0, 0.0), eye, eye.copy(),
                             np.array([1.0, 0, 0, 0]), 1.0, (0.0, 0.0, 0.0))
    n1, n2 = f1 / F, f2 / F
    theta = math.atan(F / 2)
    w = math.atanh(math.sin(theta))
    V = (n1 * math.cos(theta), n2 * math.cos(theta), math.sin(theta))
    U = _expm_bivector(n1 * G[1] @ G[3] + n2 * G[2] @ G[3], -theta)
    B = _expm_bivector(V[0] * G[0] @ G[1] + V[1] * G[0] @ G[2] + V[2] * G[0] @ G[3], -w)
    u = algebra.vierbein(B).e_down[:, 0]
    gamma = 1 + F * F / 2
    beta = (f1 / gamma, f2 / gamma, F * F / (2 * gamma))
    return Decomposition(theta, w, V, U, B, u, gamma, beta)
