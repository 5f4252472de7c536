import warnings
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from shuntdamp.circuit import (
    LF356N,
    AdjustableResistorCurve,
    BroadNetwork,
    NarrowNetwork,
    NegCapParams,
    OpAmpModel,
    control_voltage_for,
    design_resistors,
    matching_error,
    negcap_impedance,
    opamp_gain,
    resistance_from_control_voltage,
    solve_ideal_match,
    z1_impedance,
)
from shuntdamp.exceptions import DomainError, InfeasibleDesignError, InstabilityError

W = 2 * np.pi * 2000.0
ZS = 1.15 + 1 / (1j * W * 6.602e-6)
NARROW = NarrowNetwork(R3=27.84, C0=4.686e-6)
BROAD = BroadNetwork(R3=15.09e3, C0=480e-9, RX=44.6, CX=807e-9)


def test_opamp_single_pole():
    assert LF356N.gain_db == pytest.approx(105.0)
    assert abs(opamp_gain(0.0, LF356N)) == pytest.approx(LF356N.dc_gain_A0)
    a = opamp_gain(2 * np.pi * 100.0, LF356N)
    assert abs(a) == pytest.approx(LF356N.dc_gain_A0 / np.sqrt(2))
    assert np.angle(a, deg=True) == pytest.approx(-45.0)


def test_opamp_validation():
    with pytest.raises(DomainError):
        OpAmpModel(dc_gain_A0=0.5, pole_f1=100.0)


def test_design_values_for_fitted_actuator():
    r0, r1 = design_resistors(W, 6.602e-6, 1.150, 2400.0, 27.84, 4.686e-6)
    assert r0 == pytest.approx(2464.36366, rel=1e-8)
    assert r1 == pytest.approx(6.20246959, rel=1e-8)


def test_design_closes_with_ideal_amplifier():
    r0, r1 = design_resistors(W, 6.602e-6, 1.150, 2400.0, 27.84, 4.686e-6)
    z = negcap_impedance(NegCapParams(r0, r1, 2400.0, NARROW, opamp=None), W)
    assert abs(matching_error(z, ZS)) < 1e-12


def test_finite_gain_shifts_the_match_only_slightly():
    r0, r1 = design_resistors(W, 6.602e-6, 1.150, 2400.0, 27.84, 4.686e-6)
    z = negcap_impedance(NegCapParams(r0, r1, 2400.0, NARROW, opamp=LF356N), W)
    err = abs(matching_error(z, ZS))
    assert 1e-6 < err < 1e-2


def test_finite_gain_tends_to_ideal():
    nc = NegCapParams(2400.0, 6.0, 2400.0, NARROW)
    ideal = negcap_impedance(replace(nc, opamp=None), W)
    huge = negcap_impedance(replace(nc, opamp=OpAmpModel(1e14, 100.0)), W)
    assert huge == pytest.approx(ideal, rel=1e-9)


def test_infeasible_design():
    with pytest.raises(InfeasibleDesignError):
        design_resistors(W, 6.602e-6, 100.0, 2400.0, 27.84, 4.686e-6)


def test_loop_denominator_instability():
    a0 = 1e5
    # R0 + R2 - A R0 = 0 at DC for A = (R0 + R2) / R0
    nc = NegCapParams(R0=1.0, R1=1.0, R2=a0 - 1.0, network=NARROW, opamp=OpAmpModel(a0, 100.0))
    with pytest.raises(InstabilityError):
        negcap_impedance(nc, 1e-12)


@pytest.mark.parametrize("network", [NARROW, BROAD])
def test_solve_ideal_match_any_network(network):
    r0, r1 = solve_ideal_match(network, ZS, W, 2400.0)
    z = negcap_impedance(NegCapParams(r0, r1, 2400.0, network, opamp=None), W)
    assert abs(matching_error(z, ZS)) < 1e-12


def test_solve_ideal_match_equals_closed_form_for_narrow():
    assert solve_ideal_match(NARROW, ZS, W, 2400.0) == pytest.approx(
        design_resistors(W, 6.602e-6, 1.150, 2400.0, 27.84, 4.686e-6), rel=1e-12)


@given(f=st.floats(min_value=10.0, max_value=1e5))
def test_broad_network_reduces_to_narrow(f):
    w = 2 * np.pi * f
    reduced = BroadNetwork(R3=27.84, C0=4.686e-6, RX=1e30, CX=1e-30)
    assert z1_impedance(reduced, w) == pytest.approx(z1_impedance(NARROW, w), rel=1e-12)


@given(f=st.floats(min_value=1.0, max_value=1e6))
def test_reference_networks_are_passive(f):
    w = 2 * np.pi * f
    for net in (NARROW, BROAD):
        z = z1_impedance(net, w)
        assert z.real > 0 and z.imag < 0


def test_z1_rejects_dc():
    with pytest.raises(DomainError):
        z1_impedance(NARROW, 0.0)


CURVE = AdjustableResistorCurve(r_min=100.0, r_max=1e5, v_ref=1.5, control_range=(0.0, 10.0))


@given(v=st.floats(min_value=0.0, max_value=10.0))
def test_resistor_curve_roundtrip(v):
    r = CURVE.resistance(v)
    lo, hi = CURVE.resistance_range
    assert lo <= r <= hi
    assert control_voltage_for(r, CURVE) == pytest.approx(v, abs=1e-6)


def test_resistor_curve_is_monotone_decreasing():
    v = np.linspace(0, 10, 50)
    r = [CURVE.resistance(x) for x in v]
    assert np.all(np.diff(r) < 0)


def test_resistor_curve_clamps_with_warning():
    with pytest.warns(RuntimeWarning):
        r = resistance_from_control_voltage(12.0, CURVE)
    assert r == CURVE.resistance(10.0)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        CURVE.resistance(5.0)


def test_resistor_curve_inverse_out_of_range():
    with pytest.raises(DomainError):
        control_voltage_for(50.0, CURVE)
