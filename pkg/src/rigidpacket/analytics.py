"""Densities, fringes, asymmetry, variances, asymptotics and scalar estimates.

Sign convention for figure-level quantities: with the chirp e^{iαb} used by
the constructors, the nonspreading part of the packet sits in the right
Rindler wedge (Z > |T|) when α < 0.  The packet is mirror symmetric under
(Z, α) → (-Z, -α), so a figure drawn for chirp α in the right wedge is the
packet with α_packet = FIGURE_ALPHA_SIGN · α.  Functions here take the packet
parameters literally; :func:`figure_params` performs the mapping.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.special import k0, k1

from .errors import CoverageError, DomainError, MaskedPointError, PacketError, SeriesRangeError
from .fields import FieldProfile, RindlerPoint, SpacetimePoint, lab_from_rindler
from .specfun import struve_l
from .states import (
    PacketParams,
    bessel_pair,
    crdi_transform,
    free_nonspreading_scaled,
    laser_nonspreading_scaled,
    rindler_eigenstate_scaled,
)

__all__ = [
    "COMPTON_TIME_S",
    "ELECTRON_MASS_MEV",
    "FINE_STRUCTURE",
    "FIGURE_ALPHA_SIGN",
    "figure_params",
    "fs_to_compton",
    "DensityGrid",
    "density_grid",
    "detect_fringes",
    "fringe_hyperbola_offsets",
    "fringe_contrast",
    "wedge_norms",
    "asymmetry",
    "asymmetry_log_ratio",
    "variance_z_closed",
    "variance_z_numeric",
    "variance_u_numeric",
    "asymptotic_density",
    "lifetime",
    "ColliderEstimate",
    "collider_estimates",
    "chirp_delay",
    "rest_wavelength_bound",
]

COMPTON_TIME_S = 1.2880886677e-21  # ħ/mc²
ELECTRON_MASS_MEV = 0.51099895
FINE_STRUCTURE = 1 / 137.035999

FIGURE_ALPHA_SIGN = -1


def figure_params(alpha: float, abar: float) -> PacketParams:
    """Packet whose right-wedge part is the one drawn for chirp ``alpha`` in the figures."""
    return PacketParams(FIGURE_ALPHA_SIGN * alpha, abar)


def fs_to_compton(t_fs: float) -> float:
    return t_fs * 1e-15 / COMPTON_TIME_S


# ---------------------------------------------------------------------------
# density grids
# ---------------------------------------------------------------------------

@dataclass
class DensityGrid:
    """Sampled density on a rectangular window.

    ``values[j, i]`` belongs to ``axes[0][i]`` (Z̄ or ū) and ``axes[1][j]``
    (T̄ or η).  Values are normalized to unit integral over the unmasked cells;
    ``log_norm`` is the natural log of the raw integral, so raw = values·e^{log_norm}.
    """

    frame: str
    axes: tuple
    values: np.ndarray
    mask: np.ndarray
    normalization: str = "unit-integral"
    log_norm: float = 0.0
    meta: dict = field(default_factory=dict)

    @property
    def cell(self):
        return tuple(float(a[1] - a[0]) if len(a) > 1 else 1.0 for a in self.axes)

    def mask_fraction(self) -> float:
        return float(np.mean(self.mask))

    def to_csv(self) -> str:
        lines = ["coord1,coord2,value,mask"]
        a0, a1 = self.axes
        for j, y in enumerate(a1):
            for i, x in enumerate(a0):
                lines.append(f"{x:.10g},{y:.10g},{self.values[j, i]:.12e},{int(self.mask[j, i])}")
        return "\n".join(lines) + "\n"

    def metadata(self) -> dict:
        return {
            "frame": self.frame,
            "axis_names": ["Zbar", "Tbar"] if self.frame == "lab" else ["ubar", "eta"],
            "shape": [len(self.axes[1]), len(self.axes[0])],
            "window": [float(self.axes[0][0]), float(self.axes[0][-1]),
                       float(self.axes[1][0]), float(self.axes[1][-1])],
            "normalization": self.normalization,
            "log_raw_integral": self.log_norm,
            "mask_statistics": {"masked_cells": int(self.mask.sum()), "fraction": self.mask_fraction()},
            **self.meta,
        }


def _log_density(selector, params, profile, Omega, frame, x, y):
    """Natural log of the density at one grid cell; raises MaskedPointError."""
    if frame == "lab":
        point = SpacetimePoint(y, x)
    else:
        rp = RindlerPoint(y, x)
        if selector == "eigenstate":
            vec, scale = rindler_eigenstate_scaled(Omega, rp)
            return 2 * scale + math.log(float(np.vdot(vec, vec).real))
        point = lab_from_rindler(rp)
    if selector == "free":
        vec, scale = free_nonspreading_scaled(params, point)
    elif selector == "laser":
        vec, scale = laser_nonspreading_scaled(params, profile, point)
    elif selector == "rest":
        t = crdi_transform(params, profile or FieldProfile(), point)
        # R̄ψ = boost(η')(F₋, 0, F₊, 0): density 2|F₋F₊| in the rest frame
        return 2 * t.log_scale + math.log(2 * abs(t.Fm * t.Fp))
    else:
        raise ValueError(f"unknown selector {selector!r}")
    return 2 * scale + math.log(float(np.vdot(vec, vec).real))


def _row(args):
    selector, params, profile, Omega, frame, xs, y, band = args
    out = np.full(len(xs), -np.inf)
    masked = np.zeros(len(xs), dtype=bool)
    for i, x in enumerate(xs):
        if frame == "lab" and abs(abs(x) - abs(y)) < band:
            masked[i] = True
            continue
        try:
            v = _log_density(selector, params, profile, Omega, frame, x, y)
        except (MaskedPointError, DomainError):
            masked[i] = True
            continue
        if not math.isfinite(v):
            masked[i] = True
            continue
        out[i] = v
    return out, masked


def default_threads() -> int:
    env = os.environ.get("RIGIDPACKET_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def density_grid(selector: str, params: PacketParams | None, profile: FieldProfile | None,
                 window, resolution, frame: str = "lab", Omega: float | None = None,
                 normalization: str = "unit-integral", band: float | None = None,
                 threads: int = 1) -> DensityGrid:
    """Sample a density over ``window = (x0, x1, y0, y1)``.

    Lab frame: x = Z̄, y = T̄.  Rindler frame: x = ū, y = η, with packet
    densities taken in the local rest frame.  ``selector`` is one of
    ``free``, ``laser``, ``rest`` or ``eigenstate``.  In the lab frame cells
    within ``band`` of the light cone are masked (default: the larger of ā and
    half a cell along the first axis).
    """
    if frame not in ("lab", "rindler"):
        raise ValueError("frame must be 'lab' or 'rindler'")
    if normalization not in ("unit-integral", "raw"):
        raise ValueError("normalization must be 'unit-integral' or 'raw'")
    x0, x1, y0, y1 = map(float, window)
    if not (x1 > x0 and y1 >= y0):
        raise DomainError("window has zero area")
    if isinstance(resolution, int):
        nx = ny = resolution
    else:
        nx, ny = resolution
    if nx < 2 or ny < 1:
        raise DomainError("resolution too small")
    xs = np.linspace(x0, x1, nx)
    ys = np.linspace(y0, y1, ny) if ny > 1 else np.array([y0])
    if selector == "eigenstate":
        if frame != "rindler":
            raise ValueError("eigenstate densities are defined in the rindler frame")
        if Omega is None:
            raise ValueError("eigenstate selector needs Omega")
    elif params is None:
        raise ValueError("packet selectors need PacketParams")
    if band is None:
        band = max(params.abar if params is not None else 0.0, 0.5 * (xs[1] - xs[0]))
    jobs = [(selector, params, profile, Omega, frame, xs, y, band) for y in ys]
    if threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=threads) as ex:
            rows = list(ex.map(_row, jobs))
    else:
        rows = [_row(j) for j in jobs]
    logd = np.stack([r[0] for r in rows])
    mask = np.stack([r[1] for r in rows])
    if mask.all():
        raise CoverageError("every cell of the window is masked")
    dx = xs[1] - xs[0]
    dy = ys[1] - ys[0] if ny > 1 else 1.0
    good = logd[~mask]
    peak = float(good.max())
    log_norm = peak + math.log(float(np.sum(np.exp(good - peak))) * dx * dy)
    if normalization == "unit-integral":
        values = np.where(mask, 0.0, np.exp(logd - log_norm))
    else:
        values = np.where(mask, 0.0, np.exp(logd))
    return DensityGrid(frame, (xs, ys), values, mask, normalization, log_norm,
                       {"selector": selector, "band": band})


# ---------------------------------------------------------------------------
# fringes
# ---------------------------------------------------------------------------

def _row_maxima(xs, row, ok, min_visibility=0.0):
    idx = [i for i in range(1, len(xs) - 1) if ok[i - 1] and ok[i] and ok[i + 1]]
    found = []
    for i in idx:
        a, b, c = row[i - 1], row[i], row[i + 1]
        if not (b > a and b > c):
            continue
        if min_visibility > 0:
            # nearest minima on either side within the usable run
            lo = i
            while lo - 1 >= 0 and ok[lo - 1] and row[lo - 1] < row[lo]:
                lo -= 1
            hi = i
            while hi + 1 < len(xs) and ok[hi + 1] and row[hi + 1] < row[hi]:
                hi += 1
            if not (lo - 1 >= 0 and ok[lo - 1] and hi + 1 < len(xs) and ok[hi + 1]):
                # one side runs into the cone band or the window edge: a lobe, not a fringe
                continue
            floor = 0.5 * (row[lo] + row[hi])
            if (b - floor) < min_visibility * (b + floor):
                continue
        denom = a - 2 * b + c
        shift = 0.5 * (a - c) / denom if denom != 0 else 0.0
        found.append((xs[i] + shift * (xs[1] - xs[0]), b, i))
    return found


def detect_fringes(grid: DensityGrid, region: str = "outside",
                   min_visibility: float = 0.0) -> list[list[tuple]]:
    """Local maxima along each row (fixed T̄ or η) with quadratic sub-cell refinement.

    For lab grids ``region`` selects cells outside (Z̄ > |T̄|) or inside the
    light cone.  With ``min_visibility`` > 0 a maximum only counts when it is
    bracketed by two minima inside the usable run and (max - floor)/(max + floor)
    reaches that value, the floor being the mean of those minima.  Returns, per row, a list of (position, value, index).
    """
    xs, ys = grid.axes
    out = []
    for j, y in enumerate(ys):
        ok = ~grid.mask[j]
        if grid.frame == "lab":
            if region == "outside":
                ok = ok & (xs > abs(y))
            elif region == "inside":
                ok = ok & (np.abs(xs) < abs(y))
        out.append(_row_maxima(xs, grid.values[j], ok, min_visibility))
    return out


def fringe_hyperbola_offsets(grid: DensityGrid, reference_row: int = 0,
                             min_visibility: float = 0.0) -> np.ndarray:
    """Distance in cells from each lab-frame fringe maximum to the nearest
    constant-ū hyperbola through a maximum of the reference row."""
    if grid.frame != "lab":
        raise ValueError("hyperbola check applies to lab grids")
    xs, ys = grid.axes
    fr = detect_fringes(grid, min_visibility=min_visibility)
    T0 = ys[reference_row]
    ref_u = np.array([math.sqrt(max(z * z - T0 * T0, 0.0)) for z, _, _ in fr[reference_row]])
    if ref_u.size == 0:
        raise CoverageError("reference row has no fringes")
    dz = xs[1] - xs[0]
    offsets = []
    for j, T in enumerate(ys):
        if j == reference_row:
            continue
        predicted = np.sqrt(ref_u ** 2 + T * T)
        for z, _, _ in fr[j]:
            if z > predicted.max() + dz or z < predicted.min() - dz:
                # beyond the tracked family
                continue
            offsets.append(float(np.min(np.abs(predicted - z)) / dz))
    return np.asarray(offsets)


def fringe_contrast(grid: DensityGrid) -> np.ndarray:
    """Per-row mean Michelson visibility (max-min)/(max+min) between adjacent
    extrema outside the light cone; 0 for rows without fringes."""
    xs, ys = grid.axes
    res = np.zeros(len(ys))
    for j, y in enumerate(ys):
        ok = ~grid.mask[j] & ((xs > abs(y)) if grid.frame == "lab" else True)
        row = grid.values[j]
        idx = np.flatnonzero(ok)
        if idx.size < 3:
            continue
        seg = row[idx]
        d = np.diff(seg)
        turns = [k for k in range(1, len(seg) - 1) if d[k - 1] * d[k] < 0]
        if len(turns) < 2:
            continue
        vis = []
        for k0_, k1_ in zip(turns[:-1], turns[1:]):
            hi, lo = max(seg[k0_], seg[k1_]), min(seg[k0_], seg[k1_])
            if hi + lo > 0:
                vis.append((hi - lo) / (hi + lo))
        res[j] = float(np.mean(vis)) if vis else 0.0
    return res


# ---------------------------------------------------------------------------
# norms and asymmetry
# ---------------------------------------------------------------------------

def _log_trapz(logf, s):
    """log ∫ exp(logf(s)) ds on a sorted grid."""
    m = float(np.max(logf))
    w = np.exp(logf - m)
    return m + math.log(float(np.trapezoid(w, s)))


def _ubar_grid(params, scale_small, points_per_efold=50, upper=None):
    lo = math.log(1e-3 * scale_small)
    hi = math.log(upper if upper is not None else 3 * abs(params.alpha) + 60)
    n = int((hi - lo) * points_per_efold) + 1
    return np.linspace(lo, hi, n)


def wedge_norms(params: PacketParams, Tbar: float, points_per_efold: int = 50):
    """(log N_R, log N_W): rest-frame norm on the T̄ = 0 slice and the lab norm
    of the part outside the light cone (Z̄ > T̄) at time T̄.

    Both integrals run over ū on a logarithmic grid, which resolves the 1/ū
    rise of the density towards the horizon.
    """
    s = _ubar_grid(params, min(params.abar, math.sqrt(params.abar * max(Tbar, params.abar))),
                   points_per_efold)
    u = np.exp(s)
    lr = np.empty_like(u)
    lw = np.empty_like(u)
    for i, uu in enumerate(u):
        Fm, Fp, sc = bessel_pair(params.alpha, params.abar, 0.0, uu, mask_near_singular=False)
        lr[i] = 2 * sc + math.log(2 * abs(Fm * Fp)) + s[i]
        Z = math.hypot(uu, Tbar)
        Fm, Fp, sc = bessel_pair(params.alpha, params.abar, Tbar, Z, mask_near_singular=False)
        # dZ = ū dū / Z and dū = ū ds
        lw[i] = 2 * sc + math.log(abs(Fm) ** 2 + abs(Fp) ** 2) + math.log(uu / Z) + s[i]
    return _log_trapz(lr, s), _log_trapz(lw, s)


def asymmetry_log_ratio(params: PacketParams, T_lab_fs: float, points_per_efold: int = 50) -> float:
    """ln(N_R / N_W); the asymmetry is tanh of half this value."""
    lr, lw = wedge_norms(params, fs_to_compton(T_lab_fs), points_per_efold)
    return lr - lw


def asymmetry(params: PacketParams, T_lab_fs: float, points_per_efold: int = 50) -> float:
    """𝒜 = (N_R - N_W)/(N_R + N_W) at lab time ``T_lab_fs`` femtoseconds."""
    return math.tanh(0.5 * asymmetry_log_ratio(params, T_lab_fs, points_per_efold))


# ---------------------------------------------------------------------------
# variances
# ---------------------------------------------------------------------------

def variance_z_closed(params: PacketParams, Tbar: float) -> dict:
    """Closed-form normalized moments ⟨Z̄⟩, ⟨Z̄²⟩ of the free packet and the
    spreading excess δZ̄(α)² - δZ̄(0)² (which does not depend on T̄)."""
    a, al, T = params.abar, params.alpha, Tbar
    x = 2 * a
    K0, K1 = k0(x), k1(x)
    L0, Lm = struve_l(0, x), struve_l(-1, x)
    pi = math.pi
    second = (K1 * a * (4 * (al ** 2 - T ** 2) + 4 * pi * a * L0 * (al ** 2 - T ** 2) + 1) / (2 * K0)
              - 2 * pi * a ** 2 * Lm * (T - al) * (al + T)
              + pi * a * (T - al) * (al + T) / K0
              + T ** 2)
    mean = pi * al * (a * Lm + (2 * a * L0 * K1 - 1) / (2 * K0))
    delta2 = pi * al ** 2 * (
        a ** 2 * Lm * (2 - pi * Lm)
        - pi * (1 - 2 * a * L0 * K1) ** 2 / (4 * K0 ** 2)
        + a * (pi * Lm - 1) / K0
        + a * (2 / pi - 2 * a * (pi * Lm - 1) * L0) * K1 / K0
    )
    return {"mean": mean, "second_moment": second, "variance": second - mean ** 2, "delta2": delta2}


def variance_z_numeric(params: PacketParams, Tbar: float, rel_tol: float = 1e-10) -> dict:
    """Moments of ψ†ψ over the whole Z̄ line by adaptive quadrature of the closed-form packet."""
    T = abs(Tbar)
    reach = T + 3 * abs(params.alpha) + 50

    def dens(z):
        vec, sc = free_nonspreading_scaled(params, SpacetimePoint(Tbar, z))
        return float(np.vdot(vec, vec).real) * math.exp(2 * sc)

    brk = sorted({-T, T, 0.0})
    edges = [-reach] + [b for b in brk if -reach < b < reach] + [reach]
    moments = []
    for n in range(3):
        total = 0.0
        for lo, hi in zip(edges[:-1], edges[1:]):
            v, _ = quad(lambda z: z ** n * dens(z), lo, hi, limit=800, epsabs=0, epsrel=rel_tol)
            total += v
        moments.append(total)
    m0, m1, m2 = moments
    return {"norm": m0, "mean": m1 / m0, "second_moment": m2 / m0, "variance": m2 / m0 - (m1 / m0) ** 2}


def variance_u_numeric(params: PacketParams, eta: float, normalization: str = "fixed",
                       points_per_efold: int = 60, upper: float | None = None) -> float:
    """δū of the rest-frame density along the η = const slice.

    ``normalization='fixed'`` divides the moments ∫ūⁿρ dū by the norm of the
    η = 0 slice (a constant prefactor, as for an η-independent 𝒩);
    ``'slice'`` divides by the norm of the same slice, the usual variance of
    the normalized distribution.
    """
    if normalization not in ("fixed", "slice"):
        raise ValueError("normalization must be 'fixed' or 'slice'")

    def moments(e):
        s = _ubar_grid(params, params.abar * math.exp(abs(e)), points_per_efold, upper)
        u = np.exp(s)
        logr = np.empty_like(u)
        for i, uu in enumerate(u):
            Fm, Fp, sc = bessel_pair(params.alpha, params.abar, uu * math.sinh(e), uu * math.cosh(e),
                                     mask_near_singular=False)
            logr[i] = 2 * sc + math.log(2 * abs(Fm * Fp)) + s[i]
        if not np.all(np.isfinite(logr)):
            raise SeriesRangeError(f"rest-frame density underflowed at eta={e}")
        m = float(np.max(logr))
        w = np.exp(logr - m)
        return m, [float(np.trapezoid(w * u ** n, s)) for n in range(3)]

    m, (m0, m1, m2) = moments(eta)
    if normalization == "slice":
        var = m2 / m0 - (m1 / m0) ** 2
    else:
        mr, (r0, _, _) = moments(0.0)
        scale = math.exp(m - mr) / r0
        var = m2 * scale - (m1 * scale) ** 2
    if var < 0:
        raise SeriesRangeError(f"negative variance at eta={eta}")
    return math.sqrt(var)


# ---------------------------------------------------------------------------
# asymptotics and scalar estimates
# ---------------------------------------------------------------------------

def asymptotic_density(frame: str, params_or_Omega, point: RindlerPoint,
                       exponent: str = "displayed") -> float:
    """Large-η forms:
    lab     |ψ|²   ≈ exp(-2(e^η ā ū)^{1/2} - πα/2) / (√2 ū),
    rindler |ψ_R|² ≈ exp(-2ū + πΩ/2) / (√2 ū).

    Only the ū-dependence of the exponent is meaningful; prefactors were
    dropped in the expansion.  For the lab form, ζ̄² ≈ iāūe^η gives
    2 Re ζ̄ = √2 (e^η ā ū)^{1/2}, and ``exponent='corrected'`` uses that
    coefficient instead of 2 (this is what the exact density follows for
    ū ≪ e^η ā).
    """
    if point.eta < 5:
        raise DomainError("asymptotic forms need eta >= 5")
    if exponent not in ("displayed", "corrected"):
        raise ValueError("exponent must be 'displayed' or 'corrected'")
    u = point.ubar
    if frame == "lab":
        p = params_or_Omega
        coef = 2.0 if exponent == "displayed" else math.sqrt(2.0)
        return math.exp(-coef * math.sqrt(math.exp(point.eta) * p.abar * u)
                        - math.pi * p.alpha / 2) / (math.sqrt(2) * u)
    if frame == "rindler":
        W = float(params_or_Omega)
        return math.exp(-2 * u + math.pi * W / 2) / (math.sqrt(2) * u)
    raise ValueError("frame must be 'lab' or 'rindler'")


def lifetime(params: PacketParams) -> dict:
    """Leak-time bound τ_C (α² - ā²)/(2ā) and the same times 2π."""
    a, al = params.abar, abs(params.alpha)
    if not al > a:
        raise DomainError("lifetime bound needs |alpha| > abar")
    t = COMPTON_TIME_S * (al ** 2 - a ** 2) / (2 * a)
    return {"t_reduced_s": t, "t_paper_s": 2 * math.pi * t,
            "note": "t_paper uses the full Compton period 2πħ/mc²; t_reduced uses ħ/mc²"}


@dataclass(frozen=True)
class ColliderEstimate:
    gamma_rf: float
    omega0_gev: float
    recollision_time_s: float
    recollision_time_doppler_s: float
    leak_time_s: float | None
    rr_fraction: float | None
    laser_period_s: float

    def to_dict(self):
        return asdict(self)


def collider_estimates(omega_over_m: float, a0: float, gamma0: float | None = None,
                       params: PacketParams | None = None) -> ColliderEstimate:
    """Rest-frame γ from 2√2 a₀² γ ω/m = 1, photon energy Ω₀ = √2 γ a₀ m,
    laser period seen in the pair rest frame (T_L/γ and, with the head-on
    Doppler factor, T_L/(2γ)), and the radiation-reaction fraction
    2 α_f a₀² γ₀ ω/m."""
    if not (omega_over_m > 0 and a0 > 0) or (gamma0 is not None and not gamma0 > 0):
        raise DomainError("collider inputs must be positive")
    gamma = 1 / (2 * math.sqrt(2) * a0 ** 2 * omega_over_m)
    omega0 = math.sqrt(2) * gamma * a0 * ELECTRON_MASS_MEV / 1000
    period = 2 * math.pi * COMPTON_TIME_S / omega_over_m
    rr = 2 * FINE_STRUCTURE * a0 ** 2 * gamma0 * omega_over_m if gamma0 is not None else None
    leak = lifetime(params)["t_paper_s"] if params is not None else None
    return ColliderEstimate(gamma, omega0, period / gamma, period / (2 * gamma), leak, rr, period)


def chirp_delay(p, alpha: float):
    """δx(p) = ∂/∂p [α asinh p] = α/√(1+p²)."""
    return alpha / np.sqrt(1 + np.asarray(p, dtype=float) ** 2)


def rest_wavelength_bound(params: PacketParams, omega_bar: float, gamma_rf: float,
                          band: float = 0.01) -> dict:
    """Compare ā with the laser wavelength in the pair rest frame, λ' = π/(γω̄)
    (head-on Doppler shift ω' = 2γω̄), both in Compton lengths."""
    if not (omega_bar > 0 and gamma_rf > 0):
        raise DomainError("omega_bar and gamma_rf must be positive")
    lam = math.pi / (gamma_rf * omega_bar)
    ratio = params.abar / lam
    if abs(ratio - 1) <= band:
        status = "marginal"
    elif ratio < 1:
        status = "satisfied"
    else:
        status = "violated"
    return {"a_max": lam, "ratio": ratio, "satisfied": ratio <= 1 + band, "status": status}
