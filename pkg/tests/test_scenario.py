import pytest

from shuntdamp.circuit import LF356N, BroadNetwork
from shuntdamp.exceptions import ScenarioError
from shuntdamp.scenario import builtin_scenarios, load_scenario, parse_scenario

MINIMAL = """\
[actuator]
spring_n_per_m = 7.11e7
capacitance_f = 6.602e-6
coupling_k2 = 0.064

[plant]
mass_kg = 1.67
quality = 11.3

[negcap]
r2_ohm = 2400

[network]
type = narrow
r3_ohm = 27.84
c0_f = 4.686e-6
"""


def test_minimal_file_gets_defaults():
    sc = parse_scenario(MINIMAL)
    assert sc.negcap.R0 == 2400 and sc.negcap.R1 == 1.0
    assert sc.negcap.opamp == LF356N
    assert sc.actuator.series_R_S == 0.0
    assert sc.drift is None and sc.excitation.tones == ()
    assert sc.tuning.method == "oracle" and sc.tuning.band == (1000.0, 2000.0)
    assert sc.sweep == (500.0, 3000.0, 5.0)
    assert sc.control.phi0 is None


def test_shipped_narrow_values(narrow_scenario):
    sc = narrow_scenario
    assert sc.actuator.spring_K_S == 7.11e7
    assert sc.actuator.series_R_S == 1.15
    assert sc.negcap.network.R3 == 27.84
    assert sc.excitation.tones == ((2000.0, 1.0, 0.0),)


def test_shipped_broad_network(broad_scenario):
    net = broad_scenario.negcap.network
    assert isinstance(net, BroadNetwork)
    assert (net.R3, net.C0, net.RX, net.CX) == (15.09e3, 480e-9, 44.6, 807e-9)


@pytest.mark.parametrize("name", builtin_scenarios())
def test_every_builtin_loads(name):
    assert load_scenario(name).name == name


def test_drift_section_enables_drift():
    sc = load_scenario("drift_adaptive")
    assert sc.drift.target == "cap_C_S" and sc.drift.relative_change == 0.02
    assert load_scenario("drift_static").control_enabled is False


def test_unknown_key_reports_line_and_key():
    with pytest.raises(ScenarioError) as info:
        parse_scenario(MINIMAL + "[sweep]\nf_stop = 3\n")
    assert info.value.key == "f_stop"
    assert info.value.line == 18


def test_unknown_section_reports_line():
    with pytest.raises(ScenarioError) as info:
        parse_scenario(MINIMAL + "[bogus]\nx = 1\n")
    assert info.value.line == 17


def test_missing_required_key():
    text = MINIMAL.replace("quality = 11.3\n", "")
    with pytest.raises(ScenarioError) as info:
        parse_scenario(text)
    assert info.value.key == "quality"


def test_missing_required_section():
    text = MINIMAL.split("[network]")[0]
    with pytest.raises(ScenarioError, match="network"):
        parse_scenario(text)


def test_bad_number_names_the_key():
    with pytest.raises(ScenarioError) as info:
        parse_scenario(MINIMAL.replace("mass_kg = 1.67", "mass_kg = heavy"))
    assert info.value.key == "mass_kg" and info.value.line == 7


@pytest.mark.parametrize("bad", ["type = wide", "type = broad"])
def test_bad_network(bad):
    with pytest.raises(ScenarioError):
        parse_scenario(MINIMAL.replace("type = narrow", bad))


def test_domain_errors_become_scenario_errors():
    with pytest.raises(ScenarioError):
        parse_scenario(MINIMAL.replace("coupling_k2 = 0.064", "coupling_k2 = 1.5"))


def test_tone_list_parsing():
    sc = parse_scenario(MINIMAL + "[excitation]\ntones = 800:0.5, 1200:1:0.25\nnoise_rms_m = 0.1\n")
    assert sc.excitation.tones == ((800.0, 0.5, 0.0), (1200.0, 1.0, 0.25))
    assert sc.excitation.noise_rms == 0.1
    with pytest.raises(ScenarioError):
        parse_scenario(MINIMAL + "[excitation]\ntones = 800\n")


def test_seed_override_reaches_the_excitation():
    sc = load_scenario("tone_scan_1600", seed=99)
    assert sc.seed == 99 and sc.excitation.seed == 99


def test_unreadable_path():
    with pytest.raises(ScenarioError, match="cannot read"):
        load_scenario("/nonexistent/file.ini")


def test_duplicate_key():
    with pytest.raises(ScenarioError) as info:
        parse_scenario(MINIMAL.replace("quality = 11.3", "quality = 11.3\nquality = 12"))
    assert info.value.key == "quality"
