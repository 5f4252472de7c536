"""Scenario files: sectioned ``key = value`` text (INI style).

Every key carries its unit in its name. Unknown sections or keys are
rejected. See ``docs/formats.md`` for the full key table.
"""

import configparser
import re
from dataclasses import replace
from importlib import resources
from pathlib import Path

from .actuator import ActuatorParams
from .circuit import (
    LF356N,
    AdjustableResistorCurve,
    BroadNetwork,
    NarrowNetwork,
    NegCapParams,
    OpAmpModel,
)
from .exceptions import ScenarioError, ShuntDampError
from .signals import DEFAULT_EPOCH_LENGTH, DEFAULT_SAMPLE_RATE, ExcitationSpec
from .simulator import ControlSettings, DriftProfile, Scenario, TuningSettings

# section -> {key: (type, default)}; default REQUIRED marks mandatory keys
REQUIRED = object()

SCHEMA = {
    "scenario": {
        "name": (str, "scenario"),
        "duration_s": (float, 10.0),
        "epoch_length": (int, DEFAULT_EPOCH_LENGTH),
        "sample_rate_hz": (float, DEFAULT_SAMPLE_RATE),
        "seed": (int, 0),
        "control_enabled": (bool, True),
        "snapshot_every": (int, 0),
    },
    "actuator": {
        "spring_n_per_m": (float, REQUIRED),
        "capacitance_f": (float, REQUIRED),
        "coupling_k2": (float, REQUIRED),
        "loss_tan": (float, 0.0),
        "series_resistance_ohm": (float, 0.0),
    },
    "plant": {
        "mass_kg": (float, REQUIRED),
        "quality": (float, REQUIRED),
    },
    "negcap": {
        "r0_ohm": (float, None),
        "r1_ohm": (float, 1.0),
        "r2_ohm": (float, REQUIRED),
        "opamp": (str, "lf356n"),
        "opamp_gain_db": (float, 105.0),
        "opamp_pole_hz": (float, 100.0),
    },
    "network": {
        "type": (str, REQUIRED),
        "r3_ohm": (float, REQUIRED),
        "c0_f": (float, REQUIRED),
        "rx_ohm": (float, None),
        "cx_f": (float, None),
    },
    "excitation": {
        "tones": (str, ""),
        "noise_rms_m": (float, 0.0),
    },
    "drift": {
        "target": (str, "cap_C_S"),
        "shape": (str, "linear"),
        "relative_change": (float, 0.02),
        "start_s": (float, 60.0),
        "span_s": (float, 300.0),
    },
    "tuning": {
        "method": (str, "oracle"),
        "frequency_hz": (float, 2000.0),
        "band_hz": (str, "1000, 2000"),
        "r0_scale": (float, 1.0),
        "r1_scale": (float, 1.0),
    },
    "control": {
        "step_fraction": (float, 0.002),
        "adaptive_steps": (bool, True),
        "min_step_fraction": (float, 1.0 / 256.0),
        "grow_after": (int, 3),
        "force_threshold_n": (float, 0.0),
        "convergence_ratio": (float, 1e-2),
        "phi0_rad": (float, None),
        "phi1_rad": (float, None),
        "calibration_radius": (float, 0.01),
        "retarget_thresholds": (bool, False),
        "window": (str, "none"),
        "f_min_hz": (float, None),
        "f_max_hz": (float, None),
        "r0_min_ohm": (float, None),
        "r0_max_ohm": (float, None),
        "r1_min_ohm": (float, None),
        "r1_max_ohm": (float, None),
    },
    "sweep": {
        "f_start_hz": (float, 500.0),
        "f_stop_hz": (float, 3000.0),
        "f_step_hz": (float, 5.0),
    },
}

REQUIRED_SECTIONS = ("actuator", "plant", "negcap", "network")

_BOOL = {"true": True, "yes": True, "on": True, "1": True,
         "false": False, "no": False, "off": False, "0": False}

_KEY_LINE = re.compile(r"^\s*([^=:#;\s][^=:]*?)\s*[=:]")
_SECTION_LINE = re.compile(r"^\s*\[([^\]]+)\]")


def _line_index(text):
    """Map ``(section, key)`` to 1-based line numbers."""
    index = {}
    section = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        m = _SECTION_LINE.match(line)
        if m:
            section = m.group(1).strip()
            index[(section, None)] = lineno
            continue
        m = _KEY_LINE.match(line)
        if m and section is not None:
            index.setdefault((section, m.group(1).strip().lower()), lineno)
    return index


def _convert(kind, raw, key, line):
    try:
        if kind is bool:
            value = _BOOL.get(raw.strip().lower())
            if value is None:
                raise ValueError(raw)
            return value
        if kind is int:
            return int(raw)
        if kind is float:
            return float(raw)
        return raw.strip()
    except ValueError:
        raise ScenarioError(f"cannot parse {raw!r} as {kind.__name__}", line=line, key=key) from None


def _parse_tones(raw, line):
    tones = []
    for chunk in filter(None, (c.strip() for c in raw.split(","))):
        parts = chunk.split(":")
        if len(parts) not in (2, 3):
            raise ScenarioError(f"tone {chunk!r} must be hz:amplitude[:phase]", line=line, key="tones")
        try:
            vals = [float(p) for p in parts]
        except ValueError:
            raise ScenarioError(f"tone {chunk!r} is not numeric", line=line, key="tones") from None
        if len(vals) == 2:
            vals.append(0.0)
        tones.append(tuple(vals))
    return tuple(tones)


def parse_scenario(text, source="<string>"):
    """Parse scenario text into a :class:`Scenario`."""
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"),
                                       strict=True, default_section="__unused__")
    try:
        parser.read_string(text, source=source)
    except configparser.DuplicateOptionError as exc:
        raise ScenarioError(f"duplicate key {exc.option!r}", line=exc.lineno, key=exc.option) from None
    except configparser.DuplicateSectionError as exc:
        raise ScenarioError(f"duplicate section [{exc.section}]", line=exc.lineno) from None
    except configparser.MissingSectionHeaderError as exc:
        raise ScenarioError("key outside of any section", line=exc.lineno) from None
    except configparser.ParsingError as exc:
        lineno = exc.errors[0][0] if exc.errors else None
        raise ScenarioError("malformed line", line=lineno) from None

    lines = _line_index(text)
    values = {}
    for section in parser.sections():
        if section not in SCHEMA:
            raise ScenarioError(f"unknown section [{section}]", line=lines.get((section, None)))
        for key in parser[section]:
            if key not in SCHEMA[section]:
                raise ScenarioError(f"unknown key in [{section}]", line=lines.get((section, key)), key=key)
    for section, keys in SCHEMA.items():
        present = parser.has_section(section)
        if not present and section in REQUIRED_SECTIONS:
            raise ScenarioError(f"missing required section [{section}]")
        out = {}
        for key, (kind, default) in keys.items():
            if present and key in parser[section]:
                out[key] = _convert(kind, parser[section][key], key, lines.get((section, key)))
            elif default is REQUIRED:
                raise ScenarioError(f"missing required key in [{section}]",
                                    line=lines.get((section, None)), key=key)
            else:
                out[key] = default
        out["__present__"] = present
        values[section] = out
    try:
        return _build(values, lines)
    except ScenarioError:
        raise
    except (ShuntDampError, ValueError, TypeError) as exc:
        raise ScenarioError(str(exc)) from None


def _where(lines, section, key):
    return lines.get((section, key))


def _build(v, lines):
    a = v["actuator"]
    actuator = ActuatorParams(spring_K_S=a["spring_n_per_m"], cap_C_S=a["capacitance_f"],
                              coupling_k2=a["coupling_k2"], loss_tan=a["loss_tan"],
                              series_R_S=a["series_resistance_ohm"])

    n = v["network"]
    kind = n["type"].lower()
    if kind == "narrow":
        network = NarrowNetwork(R3=n["r3_ohm"], C0=n["c0_f"])
    elif kind == "broad":
        for key in ("rx_ohm", "cx_f"):
            if n[key] is None:
                raise ScenarioError("broad network needs rx_ohm and cx_f",
                                    line=_where(lines, "network", None), key=key)
        network = BroadNetwork(R3=n["r3_ohm"], C0=n["c0_f"], RX=n["rx_ohm"], CX=n["cx_f"])
    else:
        raise ScenarioError(f"network type must be narrow or broad, got {kind!r}",
                            line=_where(lines, "network", "type"), key="type")

    nc = v["negcap"]
    amp = nc["opamp"].lower()
    if amp == "ideal":
        opamp = None
    elif amp == "lf356n":
        opamp = LF356N
    elif amp == "custom":
        opamp = OpAmpModel.from_db(nc["opamp_gain_db"], nc["opamp_pole_hz"])
    else:
        raise ScenarioError(f"opamp must be ideal, lf356n or custom, got {amp!r}",
                            line=_where(lines, "negcap", "opamp"), key="opamp")
    r0 = nc["r0_ohm"] if nc["r0_ohm"] is not None else nc["r2_ohm"]
    negcap = NegCapParams(R0=r0, R1=nc["r1_ohm"], R2=nc["r2_ohm"], network=network, opamp=opamp)

    e = v["excitation"]
    excitation = ExcitationSpec(tones=_parse_tones(e["tones"], _where(lines, "excitation", "tones")),
                                noise_rms=e["noise_rms_m"], seed=v["scenario"]["seed"])

    drift = None
    if v["drift"]["__present__"]:
        d = v["drift"]
        drift = DriftProfile(target=d["target"], shape=d["shape"], relative_change=d["relative_change"],
                             start=d["start_s"], span=d["span_s"])

    t = v["tuning"]
    try:
        band = tuple(float(x) for x in t["band_hz"].split(","))
    except ValueError:
        raise ScenarioError("band_hz must be 'lo, hi'", line=_where(lines, "tuning", "band_hz"),
                            key="band_hz") from None
    if len(band) != 2:
        raise ScenarioError("band_hz must be 'lo, hi'", line=_where(lines, "tuning", "band_hz"), key="band_hz")
    tuning = TuningSettings(method=t["method"], frequency=t["frequency_hz"], band=band,
                            r0_scale=t["r0_scale"], r1_scale=t["r1_scale"])

    c = v["control"]
    curves = {}
    for r in ("r0", "r1"):
        lo, hi = c[f"{r}_min_ohm"], c[f"{r}_max_ohm"]
        if (lo is None) != (hi is None):
            raise ScenarioError(f"{r}_min_ohm and {r}_max_ohm go together", key=f"{r}_min_ohm")
        curves[r] = AdjustableResistorCurve(r_min=lo, r_max=hi) if lo is not None else None
    control = ControlSettings(
        step_fraction=c["step_fraction"], adaptive_steps=c["adaptive_steps"],
        min_step_fraction=c["min_step_fraction"], grow_after=c["grow_after"],
        force_threshold=c["force_threshold_n"], convergence_ratio=c["convergence_ratio"],
        phi0=c["phi0_rad"], phi1=c["phi1_rad"], calibration_radius=c["calibration_radius"],
        retarget_thresholds=c["retarget_thresholds"], window=c["window"],
        f_min=c["f_min_hz"], f_max=c["f_max_hz"], r0_curve=curves["r0"], r1_curve=curves["r1"])

    s = v["scenario"]
    w = v["sweep"]
    p = v["plant"]
    return Scenario(actuator=actuator, negcap=negcap, mass_M=p["mass_kg"], quality_Q=p["quality"],
                    excitation=excitation, drift=drift, control_enabled=s["control_enabled"],
                    duration=s["duration_s"], epoch_length=s["epoch_length"],
                    sample_rate=s["sample_rate_hz"], seed=s["seed"], control=control, tuning=tuning,
                    sweep=(w["f_start_hz"], w["f_stop_hz"], w["f_step_hz"]),
                    snapshot_every=s["snapshot_every"], name=s["name"])


def builtin_scenarios():
    """Names of the scenario files shipped with the package."""
    files = resources.files("shuntdamp") / "scenarios"
    return sorted(p.name[:-4] for p in files.iterdir() if p.name.endswith(".ini"))


def load_scenario(path, seed=None):
    """Load a scenario from a file path or a shipped scenario name."""
    p = Path(path)
    if not p.exists() and str(path) in builtin_scenarios():
        text = (resources.files("shuntdamp") / "scenarios" / f"{path}.ini").read_text()
        source = f"<builtin {path}>"
    else:
        try:
            text = p.read_text()
        except OSError as exc:
            raise ScenarioError(f"cannot read scenario {str(path)!r}: {exc.strerror}") from None
        source = str(p)
    scenario = parse_scenario(text, source)
    if seed is not None:
        scenario = replace(scenario, seed=seed, excitation=replace(scenario.excitation, seed=seed))
    return scenario
