"""Chiral gamma matrices, z-boosts, bilinear currents, tetrads and spinor connections.

Conventions: metric signature (+,-,-,-), chiral representation

    γ⁰ = [[0, 1], [1, 0]],   γᵏ = [[0, σᵏ], [-σᵏ, 0]],   γ⁵ = iγ⁰γ¹γ²γ³.

With these, γ⁰(1,0,1,0)ᵀ = (1,0,1,0)ᵀ is the spin-up rest spinor and
exp(γ⁰γ³ b/2)(1,0,1,0)ᵀ = (e^{-b/2},0,e^{b/2},0)ᵀ is the same state boosted to
rapidity b along +z.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError, MaskedPointError

__all__ = [
    "ETA",
    "gamma_set",
    "GAMMA",
    "GAMMA_LOWER",
    "GAMMA5",
    "slash",
    "boost_z",
    "current",
    "inv4",
    "det4",
    "Tetrad",
    "vierbein",
    "Connection",
    "spinor_connection",
    "connection_from_spinor_map",
]

ETA = np.diag([1.0, -1.0, -1.0, -1.0])

_I2 = np.eye(2, dtype=complex)
_Z2 = np.zeros((2, 2), dtype=complex)
_SIGMA = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


def gamma_set() -> dict[str, np.ndarray]:
    """Return fresh copies of γ⁰..γ³ and γ⁵ keyed by 'g0'..'g3', 'g5'."""
    g0 = np.block([[_Z2, _I2], [_I2, _Z2]])
    gs = [np.block([[_Z2, s], [-s, _Z2]]) for s in _SIGMA]
    g5 = 1j * g0 @ gs[0] @ gs[1] @ gs[2]
    return {"g0": g0, "g1": gs[0], "g2": gs[1], "g3": gs[2], "g5": g5}


_G = gamma_set()
GAMMA = np.stack([_G["g0"], _G["g1"], _G["g2"], _G["g3"]])
GAMMA.setflags(write=False)
GAMMA_LOWER = np.einsum("mn,nab->mab", ETA, GAMMA)
GAMMA_LOWER.setflags(write=False)
GAMMA5 = _G["g5"]
GAMMA5.setflags(write=False)


def slash(a) -> np.ndarray:
    """a̸ = γ^μ a_μ for a contravariant four-vector a^μ."""
    a = np.asarray(a)
    return np.einsum("m,mab->ab", ETA @ a, GAMMA)


def boost_z(w: float) -> np.ndarray:
    """exp(-γ⁰γ³ w / 2); γ⁰γ³ = diag(-1, 1, 1, -1) so the exponential is diagonal."""
    e = np.exp(0.5 * w)
    ie = 1.0 / e
    return np.diag(np.array([e, ie, ie, e], dtype=complex))


def current(psi) -> np.ndarray:
    """j^μ = ψ† γ⁰ γ^μ ψ for one spinor (shape (4,)) or a stack (shape (..., 4))."""
    psi = np.asarray(psi, dtype=complex)
    g0g = np.einsum("ab,mbc->mac", GAMMA[0], GAMMA)
    j = np.einsum("...a,mab,...b->...m", psi.conj(), g0g, psi)
    return j.real


# ---------------------------------------------------------------------------
# small-matrix helpers
# ---------------------------------------------------------------------------

def det4(m) -> complex:
    m = np.asarray(m)
    total = 0
    for j in range(4):
        minor = np.delete(np.delete(m, 0, axis=0), j, axis=1)
        total += (-1) ** j * m[0, j] * _det3(minor)
    return total


def _det3(m):
    return (m[0, 0] * (m[1, 1] * m[2, 2] - m[1, 2] * m[2, 1])
            - m[0, 1] * (m[1, 0] * m[2, 2] - m[1, 2] * m[2, 0])
            + m[0, 2] * (m[1, 0] * m[2, 1] - m[1, 1] * m[2, 0]))


def inv4(m, min_det: float = 1e-12) -> np.ndarray:
    """Inverse of a 4×4 matrix by cofactor expansion."""
    m = np.asarray(m)
    d = det4(m)
    if abs(d) <= min_det:
        raise DomainError(f"matrix is singular (|det| = {abs(d):.3e})")
    cof = np.empty((4, 4), dtype=np.result_type(m.dtype, float))
    for i in range(4):
        for j in range(4):
            minor = np.delete(np.delete(m, i, axis=0), j, axis=1)
            cof[i, j] = (-1) ** (i + j) * _det3(minor)
    return cof.T / d


# ---------------------------------------------------------------------------
# tetrads
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Tetrad:
    """e_up[α, μ] = e^α_μ and e_down[μ, α] = e^μ_α."""

    e_up: np.ndarray
    e_down: np.ndarray

    def metric(self) -> np.ndarray:
        """η_{αβ} e^α_μ e^β_ν."""
        return self.e_up.T @ ETA @ self.e_up

    def inverse_error(self) -> float:
        return float(np.max(np.abs(self.e_up @ self.e_down - np.eye(4))))


def vierbein(R) -> Tetrad:
    """Tetrad from a spinor transformation via e^α_μ = ¼ Tr[R⁻¹ γ^α R γ_μ].

    The inverse placement uses the same trace with R and R⁻¹ exchanged,
    e^μ_α = ¼ Tr[R γ^μ R⁻¹ γ_α], so no numerical 4×4 inverse of the tetrad
    itself is needed.
    """
    R = np.asarray(R, dtype=complex)
    Ri = inv4(R)
    conj_up = np.einsum("ab,nbc,cd->nad", Ri, GAMMA, R)
    conj_down = np.einsum("ab,nbc,cd->nad", R, GAMMA, Ri)
    e_up = 0.25 * np.einsum("nab,mba->nm", conj_up, GAMMA_LOWER)
    e_down = 0.25 * np.einsum("mab,nba->mn", conj_down, GAMMA_LOWER)
    return Tetrad(e_up.real.copy(), e_down.real.copy())


# ---------------------------------------------------------------------------
# spinor connection
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Connection:
    """Ω_μ for μ = 0..3 (shape (4, 4, 4)), with the chart the derivatives were taken in."""

    omega: np.ndarray
    chart: str
    h: float
    order: int


_STENCILS = {
    2: ((-1, -0.5), (1, 0.5)),
    4: ((-2, 1 / 12), (-1, -8 / 12), (1, 8 / 12), (2, -1 / 12)),
}


def _derivative(fun, point, mu, h, order):
    acc = None
    for k, c in _STENCILS[order]:
        p = np.array(point, dtype=float)
        p[mu] += k * h
        v = c * np.asarray(fun(p))
        acc = v if acc is None else acc + v
    return acc / h


def _generators_to_spinor(H):
    """Spinor-space image of the Lorentz generator H^α_β: -¼ H_{ρσ} γ^ρ γ^σ."""
    Hl = ETA @ H
    return -0.25 * np.einsum("rs,rab,sbc->ac", Hl, GAMMA, GAMMA)


def spinor_connection(
    tetrad_field: Callable[[np.ndarray], Tetrad],
    point,
    h: float = 1e-3,
    order: int = 4,
    chart: str = "lab",
    directions=(0, 1, 2, 3),
) -> Connection:
    """Spinor connection of a tetrad field from central differences.

    With Λ = e^α_μ the field of frame rotations, Ω_μ = -¼ H_{ρσ}γ^ργ^σ where
    H = (∂_μ Λ)Λ⁻¹ is an element of the Lorentz algebra.  For a tetrad built
    from a spinor map R this equals -(∂_μ R) R⁻¹.  Only the listed
    ``directions`` are differentiated; the others get Ω = 0, which is exact for
    fields that do not depend on those coordinates.
    """
    if h <= 0:
        raise ValueError("h must be positive")
    if order not in _STENCILS:
        raise ValueError("order must be 2 or 4")
    point = np.asarray(point, dtype=float)
    center = tetrad_field(point)
    omega = np.zeros((4, 4, 4), dtype=complex)
    for mu in directions:
        try:
            dL = _derivative(lambda p: tetrad_field(p).e_up, point, mu, h, order)
        except MaskedPointError as exc:
            raise MaskedPointError("connection stencil touches a masked point", exc.point) from exc
        # (Λ⁻¹)^μ_α is e_down, so H = ∂Λ · e_down
        omega[mu] = _generators_to_spinor(dL @ center.e_down)
    return Connection(omega, chart, h, order)


def connection_from_spinor_map(R_field, point, h=1e-3, order=4, directions=(0, 1, 2, 3)):
    """-(∂_μ R) R⁻¹ by central differences; an independent route to Ω_μ."""
    point = np.asarray(point, dtype=float)
    Ri = inv4(R_field(point))
    omega = np.zeros((4, 4, 4), dtype=complex)
    for mu in directions:
        omega[mu] = -_derivative(R_field, point, mu, h, order) @ Ri
    return omega
