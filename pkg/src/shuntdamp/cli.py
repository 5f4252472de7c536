"""Command-line entry point: ``shuntdamp <subcommand> --scenario S --out DIR``.

Exit status: 0 on success, 1 on other failures (I/O, infeasible design),
2 when the scenario cannot be loaded, 3 when a run aborts on instability.
"""

import argparse
import sys
import warnings
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import control
from .circuit import NarrowNetwork, design_resistors, matching_error, negcap_impedance
from .exceptions import InstabilityError, PoleError, ScenarioError, ShuntDampError
from .io import emit_csv
from .scenario import builtin_scenarios, load_scenario
from .simulator import (
    SIMLOG_COLUMNS,
    TWO_PI,
    calibrate_scenario,
    initial_negcap,
    model_phase_probe,
    run_adaptive_scenario,
    shunted_stiffness,
    transmissibility,
)
from .stability import closed_loop_poles

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_SCENARIO = 2
EXIT_INSTABILITY = 3

SWEEP_COLUMNS = ("freq_hz", "tr_db_free", "tr_db_shunted", "delta_l_tr_db")
TIMELINE_COLUMNS = ("run",) + SIMLOG_COLUMNS
SPECTRA_COLUMNS = ("run", "time_s", "freq_hz", "force_free_n", "force_shunted_n")

SUBCOMMANDS = ("sweep", "tune", "adapt", "drift", "calibrate")


@dataclass(frozen=True)
class RunConfig:
    subcommand: str
    scenario_path: str
    output_dir: Path
    seed_override: int = None
    verbosity: int = 1


def _say(cfg, text):
    if cfg.verbosity > 0:
        print(text)


def _write_report(path, items):
    width = max(len(k) for k, _ in items)
    lines = [f"{k.ljust(width)} = {v}" for k, v in items]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    return lines


def _fmt(x):
    return f"{x:.9g}"


def cmd_sweep(scenario, cfg):
    f0, f1, df = scenario.sweep
    freqs = np.arange(f0, f1 + 0.5 * df, df)
    nc = initial_negcap(scenario)
    args = (scenario.actuator, scenario.mass_M, scenario.quality_Q)
    tr_free = transmissibility(freqs, args[0], None, *args[1:])
    tr_sh = transmissibility(freqs, args[0], nc, *args[1:])
    with np.errstate(divide="ignore"):
        db_free = 20.0 * np.log10(tr_free)
        db_sh = 20.0 * np.log10(tr_sh)
    rows = list(zip(freqs, db_free, db_sh, db_sh - db_free))
    emit_csv(rows, SWEEP_COLUMNS, cfg.output_dir / "tr_sweep.csv")
    k = int(np.argmin(db_sh - db_free))
    _say(cfg, f"sweep: {len(rows)} points, deepest suppression {db_sh[k] - db_free[k]:.2f} dB "
              f"at {freqs[k]:g} Hz, free peak at {freqs[np.argmax(db_free)]:g} Hz")


def cmd_tune(scenario, cfg):
    t = scenario.tuning
    nc = initial_negcap(scenario)
    w = TWO_PI * t.frequency
    act = scenario.actuator
    z_s = act.impedance(w)
    z = negcap_impedance(nc, w)
    k_ratio = abs(complex(shunted_stiffness(np.asarray(w), act, nc))) / act.spring_K_S
    items = [
        ("scenario", scenario.name),
        ("method", t.method),
        ("frequency_hz", _fmt(t.frequency)),
        ("r0_ohm", _fmt(nc.R0)),
        ("r1_ohm", _fmt(nc.R1)),
    ]
    if isinstance(nc.network, NarrowNetwork):
        d0, d1 = design_resistors(w, act.cap_C_S, act.series_R_S, nc.R2, nc.network.R3, nc.network.C0)
        items += [("design_r0_ohm", _fmt(d0)), ("design_r1_ohm", _fmt(d1))]
    items += [
        ("matching_error", _fmt(abs(matching_error(z, z_s)))),
        ("k_eff_ratio", _fmt(k_ratio)),
    ]
    freqs = np.asarray([t.frequency])
    if t.method == "band":
        lo, hi = t.band
        freqs = np.arange(lo, hi + 2.5, 5.0)
    with np.errstate(divide="ignore"):
        delta = 20.0 * np.log10(
            transmissibility(freqs, act, nc, scenario.mass_M, scenario.quality_Q)
            / transmissibility(freqs, act, None, scenario.mass_M, scenario.quality_Q))
    items.append(("worst_delta_l_tr_db", _fmt(float(np.max(delta)))))
    poles = closed_loop_poles(act, nc, scenario.mass_M, scenario.quality_Q)
    items += [
        ("shunt_loop_max_pole_re_per_s", _fmt(float(np.max(poles.electrical.real)))),
        ("isolator_max_pole_re_per_s", _fmt(float(np.max(poles.isolator.real)))),
        ("isolator_critical_hz", _fmt(poles.critical_frequency)),
    ]
    lines = _write_report(cfg.output_dir / "tune_report.txt", items)
    _say(cfg, "\n".join(lines))


def _spectra_rows(run, log):
    rows = []
    for t, f, free, shunted in log.spectra:
        rows.extend((run, t, fi, a, b) for fi, a, b in zip(f, free, shunted))
    return rows


def _timeline_rows(run, log):
    return [(run,) + rec for rec in log.as_records()]


def _with_snapshots(scenario):
    if scenario.snapshot_every:
        return scenario
    return replace(scenario, snapshot_every=scenario.n_epochs)


def _summary(log):
    lvl = log.column("suppression_db")
    conv = log.column("converged")
    first = np.flatnonzero(conv)
    when = f"{log.rows[first[0]].time:.2f} s" if first.size else "never"
    return (f"{log.label}: {len(log)} epochs, final suppression {lvl[-1]:.2f} dB, "
            f"worst {np.max(lvl):.2f} dB, converged {when}")


def cmd_adapt(scenario, cfg):
    log = run_adaptive_scenario(_with_snapshots(scenario))
    emit_csv(_timeline_rows(log.label, log), TIMELINE_COLUMNS, cfg.output_dir / "timeline.csv")
    emit_csv(_spectra_rows(log.label, log), SPECTRA_COLUMNS, cfg.output_dir / "spectra.csv")
    _say(cfg, _summary(log))


def cmd_drift(scenario, cfg):
    sc = _with_snapshots(scenario)
    logs = [run_adaptive_scenario(sc, control_enabled=False),
            run_adaptive_scenario(sc, control_enabled=True)]
    timeline, spectra = [], []
    for log in logs:
        timeline += _timeline_rows(log.label, log)
        spectra += _spectra_rows(log.label, log)
    emit_csv(timeline, TIMELINE_COLUMNS, cfg.output_dir / "timeline.csv")
    emit_csv(spectra, SPECTRA_COLUMNS, cfg.output_dir / "spectra.csv")
    for log in logs:
        _say(cfg, _summary(log))


def cmd_calibrate(scenario, cfg):
    f = scenario.tuning.frequency
    phi0, phi1, opt = calibrate_scenario(scenario, f)
    probe = model_phase_probe(scenario, TWO_PI * f)
    violations = control.count_ccw_violations(probe, opt.r0, opt.r1, 0.02, 16)
    items = [
        ("scenario", scenario.name),
        ("frequency_hz", _fmt(f)),
        ("r0_opt_ohm", _fmt(opt.r0)),
        ("r1_opt_ohm", _fmt(opt.r1)),
        ("k_eff_ratio_opt", _fmt(opt.k_eff_ratio)),
        ("calibration_radius", _fmt(scenario.control.calibration_radius)),
        ("phi0_rad", _fmt(phi0)),
        ("phi1_rad", _fmt(phi1)),
        ("ccw_violations_r2pct", str(violations)),
    ]
    lines = _write_report(cfg.output_dir / "calibrate_report.txt", items)
    _say(cfg, "\n".join(lines))


COMMANDS = {
    "sweep": cmd_sweep,
    "tune": cmd_tune,
    "adapt": cmd_adapt,
    "drift": cmd_drift,
    "calibrate": cmd_calibrate,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", required=True,
                        help="scenario file, or the name of a shipped scenario "
                             f"({', '.join(builtin_scenarios())})")
    common.add_argument("--out", default=".", help="output directory (created if missing)")
    common.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    common.add_argument("--quiet", action="store_true", help="suppress the summary on stdout")
    parser = argparse.ArgumentParser(prog="shuntdamp",
                                     description="Negative-capacitor shunt damping simulator.")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    helps = {
        "sweep": "transmissibility sweep, free vs shunted (tr_sweep.csv)",
        "tune": "tuned resistances and matching report (tune_report.txt)",
        "adapt": "closed-loop run (timeline.csv, spectra.csv)",
        "drift": "static and adaptive runs side by side (timeline.csv, spectra.csv)",
        "calibrate": "phase thresholds around the optimum (calibrate_report.txt)",
    }
    for name in SUBCOMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return parser


def run(cfg):
    """Execute one configured command and return its exit status."""
    try:
        scenario = load_scenario(cfg.scenario_path, seed=cfg.seed_override)
    except ScenarioError as exc:
        print(f"error: scenario {cfg.scenario_path}: {exc}", file=sys.stderr)
        return EXIT_SCENARIO
    try:
        cfg.output_dir.mkdir(parents=True, exist_ok=True)
        with warnings.catch_warnings():
            if cfg.verbosity == 0:
                warnings.simplefilter("ignore")
            COMMANDS[cfg.subcommand](scenario, cfg)
    except (InstabilityError, PoleError) as exc:
        print(f"error: run aborted, circuit unstable: {exc}", file=sys.stderr)
        return EXIT_INSTABILITY
    except (ShuntDampError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    return EXIT_OK


def main(argv=None):
    args = build_parser().parse_args(argv)
    cfg = RunConfig(subcommand=args.subcommand, scenario_path=args.scenario,
                    output_dir=Path(args.out), seed_override=args.seed,
                    verbosity=0 if args.quiet else 1)
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
