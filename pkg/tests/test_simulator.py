import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from shuntdamp.exceptions import InstabilityError
from shuntdamp.mechanics import MechanicalPlant, transfer_complex
from shuntdamp.scenario import builtin_scenarios, load_scenario
from shuntdamp.simulator import (
    TWO_PI,
    DriftProfile,
    apply_drift,
    check_pole_crossing,
    force_spectra,
    initial_negcap,
    run_adaptive_scenario,
    shunted_stiffness,
    steady_state_response,
    transmissibility,
    transmissibility_sweep,
)

SWEEP = np.arange(500.0, 3000.0 + 1e-9, 5.0)


def _short(sc, seconds):
    from dataclasses import replace

    return replace(sc, duration=seconds)


def test_runs_are_deterministic(narrow_scenario):
    sc = _short(narrow_scenario, 1.0)
    a = run_adaptive_scenario(sc).as_records()
    b = run_adaptive_scenario(sc).as_records()
    assert a == b


def test_seed_changes_the_noise_only():
    sc = load_scenario("tone_scan_1600")
    nc = initial_negcap(sc)
    f, free_a, sh_a = force_spectra(sc, nc)
    _, free_b, _ = force_spectra(sc, nc, seed=8)
    k = int(np.argmin(np.abs(f - 1600.0)))
    assert not np.array_equal(free_a, free_b)
    assert free_a[k] == pytest.approx(free_b[k], rel=0.05)
    assert np.array_equal(force_spectra(sc, nc)[2], sh_a)


@given(st.floats(min_value=100.0, max_value=3000.0))
def test_steady_state_matches_plant_transfer(f):
    sc = load_scenario("narrow_2khz")
    nc = sc.negcap
    w = TWO_PI * f
    k = complex(shunted_stiffness(np.asarray(w), sc.actuator, nc))
    plant = MechanicalPlant.from_quality(k, sc.mass_M, sc.quality_Q)
    ss = steady_state_response(w, sc.actuator, nc, sc.mass_M, sc.quality_Q)
    assert complex(ss.u2_over_u1) == pytest.approx(transfer_complex(w, plant), rel=1e-12)
    # force and elongation satisfy both constitutive relations
    assert complex(ss.force_F) == pytest.approx(k * complex(ss.delta_l), rel=1e-12)


@pytest.mark.parametrize("name", builtin_scenarios())
def test_energy_sanity_on_shipped_scenarios(name):
    """Transmissibility stays under the passive resonance peak (1 % margin)."""
    sc = load_scenario(name)
    nc = initial_negcap(sc)
    bound = np.sqrt(1.0 + sc.quality_Q**2) * 1.01
    tr = transmissibility(SWEEP, sc.actuator, nc, sc.mass_M, sc.quality_Q)
    k = int(np.argmax(tr))
    assert tr[k] <= bound, f"TR {tr[k]:.2f} at {SWEEP[k]:g} Hz exceeds {bound:.2f}"


def test_broad_tuning_moves_the_resonance_down(broad_scenario):
    nc = initial_negcap(broad_scenario)
    args = (broad_scenario.actuator, broad_scenario.mass_M, broad_scenario.quality_Q)
    free = transmissibility(SWEEP, args[0], None, *args[1:])
    shunted = transmissibility(SWEEP, args[0], nc, *args[1:])
    assert SWEEP[np.argmax(free)] == pytest.approx(1073.0, abs=5.0)
    assert SWEEP[np.argmax(shunted)] < 700.0


def test_converged_run_agrees_with_the_oracle(narrow_scenario, narrow_optimum):
    log = run_adaptive_scenario(_short(narrow_scenario, 2.0))
    step0 = narrow_scenario.control.step_fraction * narrow_optimum.r0
    step1 = narrow_scenario.control.step_fraction * narrow_optimum.r1
    assert abs(log.final_state.r0 - narrow_optimum.r0) <= 5 * step0
    assert abs(log.final_state.r1 - narrow_optimum.r1) <= 5 * step1


def test_initial_negcap_oracle(narrow_scenario, narrow_optimum):
    nc = initial_negcap(narrow_scenario)
    assert (nc.R0, nc.R1) == (narrow_optimum.r0, narrow_optimum.r1)
    assert narrow_optimum.k_eff_ratio < 1e-12


def test_sweep_above_model_range_warns(narrow_scenario):
    with pytest.warns(RuntimeWarning, match="outside"):
        transmissibility_sweep(narrow_scenario, [2000.0, 3500.0])
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        transmissibility_sweep(narrow_scenario, [2000.0, 3000.0])


def test_drift_profile():
    lin = DriftProfile(start=10.0, span=100.0)
    assert (lin.fraction(0.0), lin.fraction(60.0), lin.fraction(500.0)) == (0.0, 0.5, 1.0)
    ex = DriftProfile(shape="exponential", start=0.0, span=10.0)
    assert ex.fraction(10.0) == pytest.approx(1.0)
    assert 0.5 < ex.fraction(2.0) < 1.0


def test_apply_drift_scales_the_target(narrow_scenario):
    act = narrow_scenario.actuator
    prof = DriftProfile(relative_change=0.02, start=0.0, span=10.0)
    assert apply_drift(act, prof, 5.0).cap_C_S == pytest.approx(act.cap_C_S * 1.01)
    assert apply_drift(act, None, 5.0) is act


def test_pole_crossing_aborts(narrow_scenario, narrow_optimum):
    bad = narrow_scenario.negcap.with_resistors(0.9 * narrow_optimum.r0, narrow_optimum.r1)
    with pytest.raises(InstabilityError) as info:
        check_pole_crossing(narrow_scenario.actuator, bad, narrow_scenario, epoch=4)
    assert info.value.epoch == 4
    good = narrow_scenario.negcap.with_resistors(narrow_optimum.r0, narrow_optimum.r1)
    check_pole_crossing(narrow_scenario.actuator, good, narrow_scenario)


def test_snapshots_are_recorded():
    sc = _short(load_scenario("tone_scan_1200"), 1.0)
    log = run_adaptive_scenario(sc)
    assert len(log.spectra) >= 2
    _, f, free, shunted = log.spectra[0]
    assert f.shape == free.shape == shunted.shape
