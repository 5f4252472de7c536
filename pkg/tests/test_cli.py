import subprocess
import sys

import numpy as np
import pytest

from shuntdamp.cli import EXIT_INSTABILITY, EXIT_OK, EXIT_SCENARIO, main
from shuntdamp.io import read_csv

SHORT_NARROW = """\
[scenario]
name = short
duration_s = 0.5

[actuator]
spring_n_per_m = 7.11e7
capacitance_f = 6.602e-6
coupling_k2 = 0.064
series_resistance_ohm = 1.150

[plant]
mass_kg = 1.67
quality = 11.3

[negcap]
r2_ohm = 2400

[network]
type = narrow
r3_ohm = 27.84
c0_f = 4.686e-6

[excitation]
tones = 2000:1.0

[tuning]
method = oracle
frequency_hz = 2000
r0_scale = {r0_scale}
"""


@pytest.fixture
def short_file(tmp_path):
    def make(r0_scale=1.0):
        p = tmp_path / f"short_{r0_scale}.ini"
        p.write_text(SHORT_NARROW.format(r0_scale=r0_scale))
        return str(p)
    return make


def test_sweep_finds_the_free_resonance(tmp_path):
    assert main(["sweep", "--scenario", "narrow_2khz", "--out", str(tmp_path), "--quiet"]) == EXIT_OK
    header, rows = read_csv(tmp_path / "tr_sweep.csv")
    assert header == ["freq_hz", "tr_db_free", "tr_db_shunted", "delta_l_tr_db"]
    data = np.array(rows)
    assert data[np.argmax(data[:, 1]), 0] == pytest.approx(1073.0, abs=5.0)
    assert np.min(data[:, 3]) < -100.0


def test_tune_report(tmp_path):
    assert main(["tune", "--scenario", "narrow_2khz", "--out", str(tmp_path), "--quiet"]) == EXIT_OK
    report = dict(map(str.strip, line.split(" = ")) for line in (tmp_path / "tune_report.txt").read_text().splitlines())
    assert float(report["matching_error"]) < 1e-12
    assert report["method"] == "oracle"
    assert float(report["shunt_loop_max_pole_re_per_s"]) < 0


def test_calibrate_report(tmp_path):
    assert main(["calibrate", "--scenario", "narrow_2khz", "--out", str(tmp_path), "--quiet"]) == EXIT_OK
    text = (tmp_path / "calibrate_report.txt").read_text()
    assert "phi0_rad" in text and "-1.665387" in text


def test_adapt_outputs_and_byte_identical_rerun(tmp_path, short_file):
    path = short_file()
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert main(["adapt", "--scenario", path, "--out", str(out), "--quiet"]) == EXIT_OK
    for name in ("timeline.csv", "spectra.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    header, rows = read_csv(a / "timeline.csv")
    assert header[0] == "run" and rows[0][0] == "adaptive"
    assert b"\r" not in (a / "timeline.csv").read_bytes()


def test_drift_writes_both_runs(tmp_path, short_file):
    assert main(["drift", "--scenario", short_file(), "--out", str(tmp_path), "--quiet"]) == EXIT_OK
    _, rows = read_csv(tmp_path / "timeline.csv")
    assert {r[0] for r in rows} == {"static", "adaptive"}


def test_bad_scenario_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.ini"
    bad.write_text("[plant]\nmass_kg = 1\n")
    assert main(["sweep", "--scenario", str(bad), "--out", str(tmp_path)]) == EXIT_SCENARIO
    assert "error" in capsys.readouterr().err


def test_unstable_start_exits_3(tmp_path, short_file, capsys):
    assert main(["adapt", "--scenario", short_file(0.9), "--out", str(tmp_path)]) == EXIT_INSTABILITY
    assert "unstable" in capsys.readouterr().err


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "shuntdamp", "tune", "--scenario", "narrow_2khz",
                           "--out", str(tmp_path)], capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert "r0_ohm" in proc.stdout


def test_missing_subcommand_is_a_usage_error():
    with pytest.raises(SystemExit) as info:
        main([])
    assert info.value.code == 2
