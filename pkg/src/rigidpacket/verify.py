"""Finite-difference Dirac residuals and closed-form/oracle comparisons.

Every residual is relativized by ‖ψ‖ at the point (m = 1).  The order
estimate is the log₂ ratio of the residuals at h and h/2, which is 2 for the
second-order stencil until quadrature noise takes over.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable

import numpy as np

from .algebra import GAMMA, ETA, Tetrad, inv4, spinor_connection, vierbein
from .errors import CoverageError, MaskedPointError, WedgeError
from .fields import PHI_SIGN, FieldProfile, RindlerPoint, SpacetimePoint, fdot, phi_derivative, primed_coords
from .specfun import DEFAULT_SPEC, QuadratureSpec
from .states import PacketParams, crdi_transform, rest_frame_spinor

__all__ = [
    "ResidualReport",
    "residual_free",
    "residual_planewave",
    "residual_rindler",
    "residual_transformed",
    "oracle_compare",
    "reports_to_json",
    "Gate",
    "SUITES",
    "gate_suite",
    "packet_oracle",
]

_STENCIL = {
    2: ((-1, -0.5), (1, 0.5)),
    4: ((-2, 1 / 12), (-1, -8 / 12), (1, 8 / 12), (2, -1 / 12)),
}


@dataclass
class ResidualReport:
    point: tuple
    residual_norm: float
    field_scale: float
    h: float
    order_estimate: float
    kind: str = ""
    extra: dict = field(default_factory=dict)

    def passed(self, tol: float) -> bool:
        return bool(self.residual_norm < tol)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["point"] = list(self.point)
        return d


def reports_to_json(reports: Iterable[ResidualReport], **meta) -> str:
    return json.dumps({"reports": [r.to_dict() for r in reports], **meta}, indent=2, sort_keys=True)


def _diff(fun, x0, y0, axis, h, order):
    acc = 0
    for k, c in _STENCIL[order]:
        if axis == 0:
            v = fun(x0 + k * h, y0)
        else:
            v = fun(x0, y0 + k * h)
        acc = acc + c * np.asarray(v)
    return acc / h


def _richardson(res_fn, h):
    r1 = res_fn(h)
    r2 = res_fn(h / 2)
    if r2 == 0 or r1 == 0:
        slope = float("nan")
    else:
        slope = math.log2(r1 / r2)
    return r1, r2, slope


def _lab_operator(state, point, h, order, coupling):
    T, Z = point.Tbar, point.Zbar

    def f(t, z):
        return state(SpacetimePoint(t, z))

    psi = np.asarray(f(T, Z))
    dT = _diff(f, T, Z, 0, h, order)
    dZ = _diff(f, T, Z, 1, h, order)
    out = 1j * GAMMA[0] @ dT + 1j * GAMMA[3] @ dZ - psi
    if coupling is not None:
        out = out + coupling @ psi
    scale = float(np.linalg.norm(psi))
    return float(np.linalg.norm(out)) / scale, scale


def residual_free(state: Callable[[SpacetimePoint], np.ndarray], point: SpacetimePoint,
                  h: float = 1e-3, order: int = 2) -> ResidualReport:
    """‖(iγ⁰∂_T + iγ³∂_Z - 1)ψ‖ / ‖ψ‖."""
    try:
        r1, r2, slope = _richardson(lambda hh: _lab_operator(state, point, hh, order, None)[0], h)
        scale = float(np.linalg.norm(state(point)))
    except MaskedPointError as exc:
        raise MaskedPointError("residual stencil touches a masked point", (point.Tbar, point.Zbar)) from exc
    return ResidualReport((point.Tbar, point.Zbar), r1, scale, h, slope, "free", {"residual_half_h": r2})


def _coupling(profile, point):
    f1, f2 = fdot(profile, profile.omega_bar * (point.Tbar - point.Zbar))
    # -γ^μ eA_μ with eA^μ = (0, ḟ₁, ḟ₂, 0)
    return GAMMA[1] * f1 + GAMMA[2] * f2


def residual_planewave(state, profile: FieldProfile, point: SpacetimePoint,
                       h: float = 1e-3, order: int = 2) -> ResidualReport:
    """Residual of iγ^μ∂_μψ - γ^μ eA_μ ψ - ψ for the plane-wave potential."""
    if profile.is_off:
        rep = residual_free(state, point, h, order)
        rep.kind = "planewave"
        return rep

    def op(hh):
        T, Z = point.Tbar, point.Zbar

        def f(t, z):
            return state(SpacetimePoint(t, z))

        psi = np.asarray(f(T, Z))
        dT = _diff(f, T, Z, 0, hh, order)
        dZ = _diff(f, T, Z, 1, hh, order)
        out = 1j * GAMMA[0] @ dT + 1j * GAMMA[3] @ dZ + _coupling(profile, point) @ psi - psi
        return float(np.linalg.norm(out) / np.linalg.norm(psi))

    r1, r2, slope = _richardson(op, h)
    scale = float(np.linalg.norm(state(point)))
    return ResidualReport((point.Tbar, point.Zbar), r1, scale, h, slope, "planewave",
                          {"residual_half_h": r2})


def residual_rindler(state: Callable[[RindlerPoint], np.ndarray], point: RindlerPoint,
                     h: float = 1e-3, order: int = 2) -> ResidualReport:
    """Residual of [-ū + i(γ⁰∂_η + γ³(ū∂_ū + ½))]ψ in the accelerated frame."""
    if not point.ubar - 2 * h > 0:
        raise WedgeError("stencil leaves the Rindler wedge")

    def op(hh):
        def f(eta, u):
            return state(RindlerPoint(eta, u))

        eta, u = point.eta, point.ubar
        psi = np.asarray(f(eta, u))
        de = _diff(f, eta, u, 0, hh, order)
        du = _diff(f, eta, u, 1, hh, order)
        out = -u * psi + 1j * (GAMMA[0] @ de + GAMMA[3] @ (u * du + 0.5 * psi))
        return float(np.linalg.norm(out) / np.linalg.norm(psi))

    r1, r2, slope = _richardson(op, h)
    scale = float(np.linalg.norm(state(point)))
    return ResidualReport((point.eta, point.ubar), r1, scale, h, slope, "rindler", {"residual_half_h": r2})


def _transformed_once(params, profile, point, h, order, sign, spec):
    x0 = np.array([point.Tbar, 0.0, 0.0, point.Zbar])

    def R_at(x):
        return crdi_transform(params, profile, SpacetimePoint(x[0], x[3]), sign, spec).R

    def psi_at(t, z):
        return rest_frame_spinor(params, profile, SpacetimePoint(t, z), sign, spec)

    R = R_at(x0)
    Ri = inv4(R)
    tetrad = vierbein(R)
    conn = spinor_connection(lambda x: vierbein(R_at(x)), x0, h, 4, chart="lab", directions=(0, 3))
    # γ̃^μ = R γ^μ R⁻¹ = e^μ_α γ^α
    gt = np.einsum("ma,abc->mbc", tetrad.e_down, GAMMA)
    psi = psi_at(point.Tbar, point.Zbar)
    d = [_diff(psi_at, point.Tbar, point.Zbar, 0, h, order), None, None,
         _diff(psi_at, point.Tbar, point.Zbar, 1, h, order)]
    out = -psi.astype(complex)
    for mu in (0, 3):
        out = out + 1j * gt[mu] @ (d[mu] + conn.omega[mu] @ psi)
    f1, f2 = fdot(profile, profile.omega_bar * (point.Tbar - point.Zbar))
    # -γ̃^μ eA_μ, with eA_μ = (0, -ḟ₁, -ḟ₂, 0)
    out = out + (gt[1] * f1 + gt[2] * f2) @ psi
    scale = float(np.linalg.norm(psi))

    # primed-chart stage: derivatives with respect to X' = (T', Z'), γ' = e'^α_μ γ̃^μ
    s = sign
    dphi = float(phi_derivative(profile, profile.omega_bar * (point.Tbar - point.Zbar))) * profile.omega_bar
    # ∂X'^α/∂X^μ restricted to (T, Z)
    J = np.array([[1 + s * dphi, -s * dphi], [-s * dphi, 1 + s * dphi]])
    Jinv = np.linalg.inv(J)
    gp = [J[0, 0] * gt[0] + J[0, 1] * gt[3], J[1, 0] * gt[0] + J[1, 1] * gt[3]]
    omega_p = [Jinv[0, 0] * conn.omega[0] + Jinv[1, 0] * conn.omega[3],
               Jinv[0, 1] * conn.omega[0] + Jinv[1, 1] * conn.omega[3]]
    pp = primed_coords(point, profile, sign)

    def psi_primed(tp, zp):
        # rest spinor as a function of the primed chart: boost(η'(X'))·(F₋, 0, F₊, 0)(X')
        from .states import bessel_pair
        from .algebra import boost_z
        Fm, Fp, sc = bessel_pair(params.alpha, params.abar, tp, zp, spec)
        eta_p = math.log(abs(Fp)) - math.log(abs(Fm))
        return boost_z(eta_p) @ np.array([Fm, 0, Fp, 0]) * math.exp(sc)

    dp = [_diff(psi_primed, pp.Tbar, pp.Zbar, 0, h, order), _diff(psi_primed, pp.Tbar, pp.Zbar, 1, h, order)]
    coupling = (gt[1] * f1 + gt[2] * f2) @ psi
    with_conn = -psi + coupling
    literal = -psi + coupling
    for a in range(2):
        with_conn = with_conn + 1j * gp[a] @ (dp[a] + omega_p[a] @ psi)
        literal = literal + 1j * gp[a] @ dp[a]
    return (float(np.linalg.norm(out)) / scale, scale,
            float(np.linalg.norm(with_conn)) / scale, float(np.linalg.norm(literal)) / scale)


def residual_transformed(params: PacketParams, profile: FieldProfile, point: SpacetimePoint,
                         h: float = 1e-3, order: int = 2, sign: int = PHI_SIGN,
                         spec: QuadratureSpec = DEFAULT_SPEC) -> ResidualReport:
    """Residual of iγ̃^μ(∂_μ + Ω_μ)ψ̄_R - γ̃^μ eA_μ ψ̄_R - ψ̄_R for the rest-frame spinor.

    γ̃ and Ω come from the tetrad of R̄ (the connection by a fourth-order
    stencil of the tetrad field).  The report also carries the same operator
    rewritten in the primed chart (``primed_with_connection``) and the primed
    operator with the connection term dropped (``primed_without_connection``).
    """
    try:
        a = _transformed_once(params, profile, point, h, order, sign, spec)
        b = _transformed_once(params, profile, point, h / 2, order, sign, spec)
    except MaskedPointError as exc:
        raise MaskedPointError("transformed residual stencil touches a masked point",
                               (point.Tbar, point.Zbar)) from exc
    slope = math.log2(a[0] / b[0]) if a[0] > 0 and b[0] > 0 else float("nan")
    return ResidualReport((point.Tbar, point.Zbar), a[0], a[1], h, slope, "transformed",
                          {"residual_half_h": b[0], "chart": "lab",
                           "primed_with_connection": a[2],
                           "primed_without_connection": a[3]})


def oracle_compare(closed: Callable, oracle: Callable, grid: Iterable) -> dict:
    """Max over the grid of ‖closed - oracle‖∞ / ‖oracle‖; masked points are skipped."""
    worst = -1.0
    where = None
    used = 0
    skipped = 0
    for p in grid:
        try:
            a = np.asarray(closed(p))
            b = np.asarray(oracle(p))
        except MaskedPointError:
            skipped += 1
            continue
        nb = np.linalg.norm(b)
        err = float(np.max(np.abs(a - b)) / nb) if nb > 0 else float(np.max(np.abs(a - b)))
        used += 1
        if err > worst:
            worst, where = err, p
    if used == 0:
        raise CoverageError("no unmasked grid points to compare")
    return {"max_rel_err": worst, "argmax_point": where, "n_points": used, "n_masked": skipped}


@dataclass
class Gate:
    name: str
    report: ResidualReport
    tol: float
    slope_target: float | None

    @property
    def passed(self) -> bool:
        ok = self.report.residual_norm < self.tol
        if self.slope_target is not None:
            ok = ok and abs(self.report.order_estimate - self.slope_target) <= 0.3
        return bool(ok)

    def row(self) -> dict:
        return {"gate": self.name, "residual": self.report.residual_norm, "tol": self.tol,
                "slope": self.report.order_estimate, "passed": self.passed}


SUITES = ("free", "laser", "rindler", "volkov", "transformed")


def gate_suite(suites=SUITES, h: float = 1e-3, order: int = 2, tol: float = 1e-6,
               transformed_tol: float = 1e-4) -> list[Gate]:
    """The residual gates for every closed-form state.

    The Richardson slope is gated (2 ± 0.3) only for the second-order stencil;
    at fourth order quadrature noise sets the floor before truncation does.
    """
    from .states import free_nonspreading, laser_nonspreading, rindler_eigenstate, volkov

    unknown = set(suites) - set(SUITES)
    if unknown:
        raise ValueError(f"unknown suites {sorted(unknown)}")
    slope = 2.0 if order == 2 else None
    linear = FieldProfile("linear", 1.0, 0.1)
    circular = FieldProfile("circular", 1.0, 0.1)
    gates = []
    if "free" in suites:
        p = PacketParams(30, 0.005)
        for T, Z in ((1.0, 35.0), (20.0, 45.0)):
            rep = residual_free(lambda q: free_nonspreading(p, q), SpacetimePoint(T, Z), h, order)
            gates.append(Gate(f"free alpha=30 abar=0.005 T={T:g} Z={Z:g}", rep, tol, slope))
    if "laser" in suites:
        p = PacketParams(30, 0.005)
        for prof in (linear, circular):
            pt = SpacetimePoint(3.0, 36.0)
            rep = residual_planewave(lambda q: laser_nonspreading(p, prof, q), prof, pt, h, order)
            gates.append(Gate(f"laser {prof.kind} a0=1 T=3 Z=36", rep, tol, slope))
    if "rindler" in suites:
        for W in (0.0, 3.0, 5.0):
            rep = residual_rindler(lambda q: rindler_eigenstate(W, q), RindlerPoint(0.3, 2.0), h, order)
            gates.append(Gate(f"rindler Omega={W:g} eta=0.3 u=2", rep, tol, slope))
    if "volkov" in suites:
        for prof in (linear, circular):
            for b in (0.0, 1.0, -1.0):
                rep = residual_planewave(lambda q: volkov(b, prof, q), prof, SpacetimePoint(3.3, 1.2), h, order)
                gates.append(Gate(f"volkov {prof.kind} b={b:g} T=3.3 Z=1.2", rep, tol, slope))
    if "transformed" in suites:
        p = PacketParams(30, 0.005)
        rep = residual_transformed(p, linear, SpacetimePoint(3.0, 36.0), h, order)
        gates.append(Gate("transformed linear a0=1 T=3 Z=36", rep, transformed_tol, None))
    return gates


def packet_oracle(params: PacketParams, profile: FieldProfile | None, point: SpacetimePoint,
                  sign: int = PHI_SIGN, spec: QuadratureSpec = DEFAULT_SPEC):
    """The packet as a rapidity integral of Volkov states with weight e^{iαb - ā cosh b}.

    Independent of the Bessel closed form: the integrand is the Volkov spinor
    itself and only the contour placement borrows the packet's saddle.
    Returns (spinor, error_estimate).
    """
    from .specfun import rapidity_contour, rapidity_integral
    from .states import volkov_integrand

    profile = profile or FieldProfile()
    tp = primed_coords(point, profile, sign)
    contour = rapidity_contour(params.alpha, params.abar, tp.Tbar, tp.Zbar)
    return rapidity_integral(lambda b: volkov_integrand(b, profile, point, sign),
                             lambda b: 1j * params.alpha * b - params.abar * np.cosh(b),
                             contour, spec, abar=params.abar)
