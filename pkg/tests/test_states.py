import cmath
import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from rigidpacket.algebra import ETA, boost_z, current, det4, vierbein
from rigidpacket.analytics import _log_density
from rigidpacket.errors import MaskedPointError, NoDampingError, WedgeError
from rigidpacket.fields import FieldProfile, RindlerPoint, SpacetimePoint, lab_from_rindler, primed_coords
from rigidpacket.states import (
    OMEGA_SIGN,
    PacketParams,
    crdi_transform,
    decompose_boost_rotation,
    eta_prime_trace_form,
    free_nonspreading,
    lab_from_rest,
    null_rotation,
    laser_nonspreading,
    rest_frame_spinor,
    rindler_eigenstate,
    volkov,
)
from rigidpacket.verify import packet_oracle

OFF = FieldProfile()
LIN = FieldProfile("linear", 1.0, 0.1)
CIRC = FieldProfile("circular", 1.0, 0.1)
P = PacketParams(30, 0.005)

lab_points = st.builds(SpacetimePoint, st.floats(0, 60), st.floats(5, 80))


def off_cone(pt, prof=OFF, margin=0.5):
    """Reject points within ``margin`` of the light cone in primed coordinates."""
    q = primed_coords(pt, prof)
    assume(abs(abs(q.Zbar) - abs(q.Tbar)) > margin)


def _relerr(a, b):
    return np.linalg.norm(a - b) / np.linalg.norm(b)


def test_params_validation():
    with pytest.raises(NoDampingError):
        PacketParams(1.0, 0.0)
    assert PacketParams(2.0, 1.0).omega == OMEGA_SIGN * 2.0
    assert PacketParams(2.0, 1.0, Omega=5.0).omega == 5.0


def test_eigenstate_half_order_components():
    psi = rindler_eigenstate(0.0, RindlerPoint(0.0, 1.0))
    expect = 2 * math.sqrt(2) / math.pi * math.sqrt(math.pi / 2) * math.exp(-1)
    assert abs(psi[0]) == pytest.approx(expect, rel=1e-13)
    assert abs(psi[2]) == pytest.approx(expect, rel=1e-13)
    assert psi[1] == 0 and psi[3] == 0


@given(st.floats(-8, 8), st.floats(-5, 5))
def test_eigenstate_stationary(Omega, eta):
    a = rindler_eigenstate(Omega, RindlerPoint(0.0, 2.0))
    b = rindler_eigenstate(Omega, RindlerPoint(eta, 2.0))
    assert np.vdot(b, b).real == pytest.approx(np.vdot(a, a).real, rel=1e-12)


def test_eigenstate_wedge_only():
    with pytest.raises(WedgeError):
        RindlerPoint(0.0, -1.0)


def test_free_packet_half_order_closed_form():
    # α = 0, ā = 1 at the origin: X = 1, L = 0, F = 2K_{∓1/2}(1) = 2√(π/2)e^{-1}
    psi = free_nonspreading(PacketParams(0.0, 1.0), SpacetimePoint(0.0, 0.0))
    expect = 2 * math.sqrt(math.pi / 2) * math.exp(-1)
    assert psi[0] == pytest.approx(expect, rel=1e-13)
    assert psi[2] == pytest.approx(expect, rel=1e-13)


def test_free_packet_matches_rapidity_integral():
    pt = SpacetimePoint(1.0, 35.0)
    ref, err = packet_oracle(P, None, pt)
    assert _relerr(free_nonspreading(P, pt), ref) < 1e-8


@given(st.floats(0, 40), st.floats(5, 60), st.floats(-40, 40))
def test_mirror_symmetry(T, Z, alpha):
    assume(abs(abs(Z) - T) > 0.5)
    p, q = PacketParams(alpha, 0.05), PacketParams(-alpha, 0.05)
    try:
        a = free_nonspreading(p, SpacetimePoint(T, -Z))
        b = free_nonspreading(q, SpacetimePoint(T, Z))
    except MaskedPointError:
        assume(False)
    da, db = np.vdot(a, a).real, np.vdot(b, b).real
    assert da == pytest.approx(db, rel=1e-10, abs=1e-300)


def test_volkov_field_off():
    pt = SpacetimePoint(1.7, 0.4)
    assert np.allclose(volkov(0.0, OFF, pt), np.array([1, 0, 1, 0]) * cmath.exp(-1.7j), atol=1e-15)
    phase = cmath.exp(-1j * (1.7 * math.cosh(1) - 0.4 * math.sinh(1)))
    expect = np.array([math.exp(-0.5), 0, math.exp(0.5), 0]) * phase
    assert np.allclose(volkov(1.0, OFF, pt), expect, atol=1e-14)


@given(lab_points)
def test_laser_packet_field_off_is_free(pt):
    try:
        a = laser_nonspreading(P, OFF, pt)
    except MaskedPointError:
        assume(False)
    assert np.array_equal(a, free_nonspreading(P, pt))


def test_laser_packet_matches_oracle():
    pt = SpacetimePoint(10.0, 20.0)
    ref, _ = packet_oracle(P, LIN, pt)
    assert _relerr(laser_nonspreading(P, LIN, pt), ref) < 1e-8


@given(lab_points, st.sampled_from([LIN, CIRC]))
def test_laser_second_component_ratio(pt, prof):
    try:
        psi = laser_nonspreading(P, prof, pt)
    except MaskedPointError:
        assume(False)
    xi = prof.omega_bar * (pt.Tbar - pt.Zbar)
    f = complex(prof.a0 * math.cos(xi), prof.a0 * math.sin(xi) if prof.kind == "circular" else 0.0)
    assert psi[1] == pytest.approx(f * psi[2], rel=1e-14, abs=1e-300)


def test_crdi_small_abar_limit():
    pt = SpacetimePoint(1.0, 3.0)
    errs = []
    for ab in (1e-3, 1e-4, 1e-5):
        t = crdi_transform(PacketParams(0.0, ab), OFF, pt)
        assert np.allclose(t.R, boost_z(t.eta_prime), atol=0)
        errs.append(abs(t.eta_prime - math.atanh(pt.Tbar / pt.Zbar)))
    assert errs[0] > errs[1] > errs[2] and errs[2] < 1e-10


@given(lab_points, st.sampled_from([OFF, LIN, CIRC]))
def test_crdi_properties(pt, prof):
    off_cone(pt, prof)
    try:
        t = crdi_transform(P, prof, pt)
    except MaskedPointError:
        assume(False)
    assert abs(det4(t.R) - 1) < 1e-10
    if prof.is_off:
        off_diag = t.R - np.diag(np.diag(t.R))
        assert np.all(off_diag == 0)
    tet = vierbein(t.R)
    g = tet.e_down.T @ ETA @ tet.e_down
    assert np.allclose(g, g.T, atol=1e-10)
    assert np.allclose(tet.e_up @ tet.e_down, np.eye(4), atol=1e-10)
    eta_trace = eta_prime_trace_form(P, prof, pt)
    assert abs(eta_trace.imag) < 1e-10
    assert eta_trace.real == pytest.approx(t.eta_prime, abs=1e-9)


@given(lab_points, st.sampled_from([OFF, LIN, CIRC]))
def test_rest_frame_current(pt, prof):
    off_cone(pt, prof)
    try:
        psi = rest_frame_spinor(P, prof, pt)
    except MaskedPointError:
        assume(False)
    j = current(psi)
    assert np.all(np.abs(j[1:]) < 1e-8 * j[0])
    assert abs(psi[1]) < 1e-10 * np.abs(psi).max()
    assert abs(psi[3]) < 1e-10 * np.abs(psi).max()


def test_rest_frame_current_field_off_t0():
    j = current(rest_frame_spinor(P, OFF, SpacetimePoint(0.0, 20.0)))
    assert abs(j[3]) < 1e-8 * j[0]


@given(lab_points)
def test_lab_from_rest_roundtrip(pt):
    off_cone(pt)
    off_cone(pt, LIN)
    try:
        free = free_nonspreading(P, pt)
        back = lab_from_rest(P, OFF, pt)
        laser = laser_nonspreading(P, LIN, pt)
        back_l = lab_from_rest(P, LIN, pt)
    except MaskedPointError:
        assume(False)
    assert _relerr(back, free) < 1e-12
    assert _relerr(back_l, laser) < 1e-10


def test_component_order_mutation():
    # the other ordering does not survive the round trip through R̄⁻¹
    pt = SpacetimePoint(10.0, 20.0)
    laser = laser_nonspreading(P, LIN, pt)
    assert _relerr(lab_from_rest(P, LIN, pt, ordering="plus_first"), laser) > 1e-3


def test_omega_sign_mutation():
    # ā → 0: the field-off rest spinor tends to the Rindler eigenstate of energy Ω = OMEGA_SIGN·α
    alpha, rp = 3.0, RindlerPoint(0.4, 2.0)
    pt = lab_from_rindler(rp)
    rest = rest_frame_spinor(PacketParams(alpha, 1e-5), OFF, pt)

    def spread(Omega):
        e = rindler_eigenstate(Omega, rp)
        r = rest[[0, 2]] / e[[0, 2]]
        return abs(r[0] - r[1]) / abs(r[0])

    assert spread(OMEGA_SIGN * alpha) < 1e-3
    assert spread(-OMEGA_SIGN * alpha) > 0.1


def test_nonspreading_limit():
    # the rest-density profile departs from its η-independent limit by about α e^η ā/ū,
    # so the comparison window starts where that is small
    def l2(abar, u0):
        us = np.linspace(u0, 60, 300)
        prof = {}
        for eta in (2, 8):
            d = np.exp([_log_density("rest", PacketParams(-40, abar), None, None, "rindler", u, eta) for u in us])
            prof[eta] = d / np.sqrt(np.trapezoid(d * d, us))
        return math.sqrt(np.trapezoid((prof[8] - prof[2]) ** 2, us))

    assert l2(1e-6, 5.0) < 0.01
    assert l2(1e-8, 0.1) < 0.01
    assert 5 < l2(1e-6, 1.0) / l2(1e-7, 1.0) < 20


def test_decomposition_examples():
    d = decompose_boost_rotation(OFF, 0.3)
    assert d.theta == 0 and d.w == 0 and np.array_equal(d.proper_velocity, [1, 0, 0, 0])
    d = decompose_boost_rotation(FieldProfile("linear", 2.0, 0.1), 0.0)
    assert d.gamma == pytest.approx(3.0)
    assert d.beta[2] == pytest.approx(2 / 3)


@given(st.floats(-20, 20), st.floats(0.1, 5))
def test_decomposition_properties(xi, a0):
    prof = FieldProfile("circular", a0, 0.1)
    d = decompose_boost_rotation(prof, xi)
    u = d.proper_velocity
    assert u @ ETA @ u == pytest.approx(1.0, abs=1e-10)
    f1, f2 = a0 * math.cos(xi), a0 * math.sin(xi)
    assert np.allclose(d.U @ d.B, null_rotation(complex(f1, f2)), atol=1e-12)
    assert u[0] == pytest.approx(d.gamma, rel=1e-10)
