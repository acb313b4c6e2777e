import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rigidpacket.algebra import boost_z
from rigidpacket.errors import CoverageError, MaskedPointError, WedgeError
from rigidpacket.fields import FieldProfile, RindlerPoint, SpacetimePoint, lab_from_rindler
from rigidpacket.states import (
    OMEGA_SIGN,
    PacketParams,
    free_nonspreading,
    laser_nonspreading,
    rest_frame_spinor,
    rindler_eigenstate,
    volkov,
)
from rigidpacket.verify import (
    SUITES,
    gate_suite,
    oracle_compare,
    packet_oracle,
    reports_to_json,
    residual_free,
    residual_planewave,
    residual_rindler,
    residual_transformed,
)

P = PacketParams(30, 0.005)
LIN = FieldProfile("linear", 1.0, 0.1)
OFF = FieldProfile()

TRUNCATION = ("second-order stencil truncation h²E²/6 ≈ 2e-7 at h=1e-3 exceeds 1e-8; "
              "the fourth-order check below shows the state is exact")


def plane_wave(b):
    spin = np.array([math.exp(-b / 2), 0, math.exp(b / 2), 0])
    return lambda q: spin * np.exp(-1j * (math.cosh(b) * q.Tbar - math.sinh(b) * q.Zbar))


@pytest.mark.xfail(strict=True, reason=TRUNCATION)
def test_plane_wave_residual_second_order():
    assert residual_free(plane_wave(0.5), SpacetimePoint(2.0, 3.0)).residual_norm < 1e-8


@given(st.floats(-3, 3), st.floats(-10, 10), st.floats(-10, 10))
def test_plane_wave_residual_fourth_order(b, T, Z):
    assert residual_free(plane_wave(b), SpacetimePoint(T, Z), order=4).residual_norm < 1e-8


def test_free_packet_gate_and_slope():
    rep = residual_free(lambda q: free_nonspreading(P, q), SpacetimePoint(1.0, 35.0))
    assert rep.residual_norm < 1e-6
    assert rep.residual_norm / rep.extra["residual_half_h"] == pytest.approx(4.0, rel=0.05)
    assert rep.residual_norm >= 0 and rep.h == 1e-3


def test_planewave_gates():
    assert residual_planewave(lambda q: volkov(0.5, LIN, q), LIN, SpacetimePoint(2.0, 1.0)).residual_norm < 1e-6
    rep = residual_planewave(lambda q: laser_nonspreading(P, LIN, q), LIN, SpacetimePoint(3.0, 36.0))
    assert rep.residual_norm < 1e-6


def test_planewave_field_off_is_free():
    state = lambda q: free_nonspreading(P, q)
    a = residual_planewave(state, OFF, SpacetimePoint(1.0, 35.0))
    b = residual_free(state, SpacetimePoint(1.0, 35.0))
    assert a.residual_norm == b.residual_norm


@pytest.mark.xfail(strict=True, reason=TRUNCATION)
def test_rindler_half_order_second_order():
    rep = residual_rindler(lambda q: rindler_eigenstate(0.0, q), RindlerPoint(0.3, 2.0))
    assert rep.residual_norm < 1e-8


def test_rindler_fourth_order():
    for W in (0.0, 3.0, 5.0):
        rep = residual_rindler(lambda q: rindler_eigenstate(W, q), RindlerPoint(0.3, 2.0), order=4)
        assert rep.residual_norm < 1e-8


@pytest.mark.xfail(strict=True, reason="η-derivative truncation Ω³h²/6 ≈ 2e-5 at Ω=5, h=1e-3")
def test_rindler_omega5_second_order():
    rep = residual_rindler(lambda q: rindler_eigenstate(5.0, q), RindlerPoint(0.3, 2.0))
    assert rep.residual_norm < 1e-6


def test_rindler_wedge():
    with pytest.raises(WedgeError):
        residual_rindler(lambda q: rindler_eigenstate(0.0, q), RindlerPoint(0.0, 1e-3))


def test_boosted_free_packet_solves_rindler_equation():
    rp = RindlerPoint(0.3, 35.0)

    def boosted(sign):
        return lambda q: boost_z(sign * q.eta) @ free_nonspreading(P, lab_from_rindler(q))

    rep = residual_rindler(boosted(1), rp)
    assert rep.order_estimate == pytest.approx(2.0, abs=0.05)
    assert residual_rindler(boosted(1), rp, order=4).residual_norm < 1e-6
    assert residual_rindler(boosted(-1), rp, order=4).residual_norm > 1


def test_transformed_residual():
    rep = residual_transformed(P, LIN, SpacetimePoint(3.0, 36.0))
    assert rep.residual_norm < 1e-4
    assert rep.order_estimate == pytest.approx(2.0, abs=0.3)
    assert rep.extra["primed_with_connection"] < 1e-4
    assert rep.extra["primed_without_connection"] > 1e-3


def test_transformed_field_off_small_alpha():
    rep = residual_transformed(PacketParams(0.0, 0.005), OFF, SpacetimePoint(3.0, 36.0))
    assert rep.residual_norm < 1e-4


def test_oracle_compare_harness():
    f = lambda p: free_nonspreading(P, p)
    grid = [SpacetimePoint(T, Z) for T in (0.0, 10.0) for Z in (20.0, 40.0)]
    assert oracle_compare(f, f, grid)["max_rel_err"] == 0
    tiny = lambda p: free_nonspreading(PacketParams(30, 1e-9), p)
    with pytest.raises(CoverageError):
        oracle_compare(tiny, tiny, [SpacetimePoint(0.0, 0.0)])


def test_oracle_compare_closed_vs_quadrature_small_grid():
    grid = [SpacetimePoint(T, Z) for T in np.linspace(0, 60, 4) for Z in np.linspace(5, 80, 4)]
    out = oracle_compare(lambda p: laser_nonspreading(P, LIN, p),
                         lambda p: packet_oracle(P, LIN, p)[0], grid)
    assert out["max_rel_err"] < 1e-8


def test_mutation_phi_sign():
    pt = SpacetimePoint(3.0, 36.0)
    good = residual_planewave(lambda q: laser_nonspreading(P, LIN, q), LIN, pt, order=4).residual_norm
    bad = residual_planewave(lambda q: laser_nonspreading(P, LIN, q, sign=1), LIN, pt, order=4).residual_norm
    assert bad / good > 1e6
    closed = laser_nonspreading(P, LIN, SpacetimePoint(10.0, 20.0), sign=1)
    ref, _ = packet_oracle(P, LIN, SpacetimePoint(10.0, 20.0))
    assert np.linalg.norm(closed - ref) / np.linalg.norm(ref) > 0.1


def test_mutation_component_order():
    pt = SpacetimePoint(1.0, 35.0)
    good = residual_free(lambda q: free_nonspreading(P, q), pt, order=4).residual_norm
    bad = residual_free(lambda q: free_nonspreading(P, q, ordering="plus_first"), pt, order=4).residual_norm
    assert bad / good > 1e6


def test_mutation_omega_sign():
    alpha, rp = 3.0, RindlerPoint(0.4, 2.0)
    rest = rest_frame_spinor(PacketParams(alpha, 1e-8), OFF, lab_from_rindler(rp))

    def spread(Omega):
        e = rindler_eigenstate(Omega, rp)
        r = rest[[0, 2]] / e[[0, 2]]
        return abs(r[0] - r[1]) / abs(r[0])

    assert spread(-OMEGA_SIGN * alpha) / spread(OMEGA_SIGN * alpha) > 1e6


def test_gate_suite_fourth_order_all_pass():
    gates = gate_suite(order=4)
    assert {g.name.split()[0] for g in gates} == set(SUITES)
    assert all(g.passed for g in gates), [g.row() for g in gates if not g.passed]


def test_reports_serialize():
    rep = residual_free(plane_wave(0.0), SpacetimePoint(0.0, 0.0))
    doc = json.loads(reports_to_json([rep], suite="x"))
    assert doc["suite"] == "x" and doc["reports"][0]["kind"] == "free"


def test_masked_stencil():
    with pytest.raises(MaskedPointError):
        residual_free(lambda q: free_nonspreading(PacketParams(30, 1e-9), q), SpacetimePoint(0.0, 0.0))
