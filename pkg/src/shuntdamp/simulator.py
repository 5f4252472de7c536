"""Steady-state simulation of the shunted isolator and its adaptive loop.

Each epoch is treated as a periodic steady state: the incident displacement
is synthesised, transformed, pushed bin by bin through the harmonic model of
plant, actuator and shunt, and transformed back into the force and voltage
records the controller sees.

The isolating element keeps its mechanical quality factor when the shunt
changes its stiffness, so its viscous damping scales as ``sqrt(|K|)``.
"""

import logging
import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import optimize

from . import control
from .actuator import ActuatorParams, effective_spring_constant
from .circuit import (
    LF356N,
    AdjustableResistorCurve,
    BroadNetwork,
    NarrowNetwork,
    NegCapParams,
    design_resistors,
    negcap_impedance,
    solve_ideal_match,
)
from .exceptions import DomainError, InstabilityError, PoleError, SingularityError
from .mechanics import MechanicalPlant, TransmissibilityPoint, suppression_level
from .signals import (
    DEFAULT_EPOCH_LENGTH,
    DEFAULT_SAMPLE_RATE,
    ExcitationSpec,
    SpectrumFrame,
    TimeSeries,
    inverse_spectrum,
    spectrum,
    synthesize,
)
from .stability import closed_loop_poles
from .validation import check_frequencies

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * np.pi

#: Upper edge of the band in which the actuator/circuit model was fitted.
MODEL_VALID_MAX_HZ = 3000.0


@dataclass(frozen=True)
class DriftProfile:
    """Scripted change of one actuator parameter over time."""

    target: str = "cap_C_S"
    shape: str = "linear"
    relative_change: float = 0.02
    start: float = 60.0
    span: float = 300.0

    def __post_init__(self):
        if self.target not in ("cap_C_S", "series_R_S"):
            raise DomainError(f"drift target must be cap_C_S or series_R_S, got {self.target!r}")
        if self.shape not in ("linear", "exponential"):
            raise DomainError(f"drift shape must be linear or exponential, got {self.shape!r}")
        if not self.span > 0:
            raise DomainError("drift span must be > 0")
        if not self.relative_change > -1:
            raise DomainError("drift relative_change must be > -1")

    def fraction(self, t):
        """Fraction of the total change applied at time ``t``, in ``[0, 1]``."""
        s = min(max((t - self.start) / self.span, 0.0), 1.0)
        if self.shape == "linear":
            return s
        # first-order approach with time constant span/5, pinned to 1 at the end
        return (1.0 - np.exp(-5.0 * s)) / (1.0 - np.exp(-5.0))


def apply_drift(params, profile, t):
    if t < 0:
        raise DomainError("t must be >= 0")
    if profile is None:
        return params
    frac = profile.fraction(t)
    if frac == 0.0:
        return params
    factor = 1.0 + profile.relative_change * frac
    return params.scaled(**{profile.target: factor})


@dataclass(frozen=True)
class ControlSettings:
    step_fraction: float = 0.002
    adaptive_steps: bool = True
    min_step_fraction: float = 1.0 / 256.0
    grow_after: int = 3
    force_threshold: float = 0.0
    convergence_ratio: float = 1e-2
    phi0: float = None
    phi1: float = None
    calibration_radius: float = 0.01
    retarget_thresholds: bool = False
    window: str = "none"
    f_min: float = None
    f_max: float = None
    r0_curve: AdjustableResistorCurve = None
    r1_curve: AdjustableResistorCurve = None


@dataclass(frozen=True)
class TuningSettings:
    """How the circuit is set before the run starts.

    ``method`` is one of ``manual`` (use the negcap values as given),
    ``design`` (closed-form narrow-network formulas), ``oracle`` (numerical
    optimum at ``frequency``) or ``band`` (minimax over ``band``).
    ``r0_scale``/``r1_scale`` then detune the result.
    """

    method: str = "oracle"
    frequency: float = 2000.0
    band: tuple = (1000.0, 2000.0)
    r0_scale: float = 1.0
    r1_scale: float = 1.0

    def __post_init__(self):
        if self.method not in ("manual", "design", "oracle", "band"):
            raise DomainError(f"unknown tuning method {self.method!r}")


@dataclass(frozen=True)
class Scenario:
    actuator: ActuatorParams
    negcap: NegCapParams
    mass_M: float
    quality_Q: float
    excitation: ExcitationSpec = field(default_factory=ExcitationSpec)
    drift: DriftProfile = None
    control_enabled: bool = True
    duration: float = 10.0
    epoch_length: int = DEFAULT_EPOCH_LENGTH
    sample_rate: float = DEFAULT_SAMPLE_RATE
    seed: int = 0
    control: ControlSettings = field(default_factory=ControlSettings)
    tuning: TuningSettings = field(default_factory=TuningSettings)
    sweep: tuple = (500.0, 3000.0, 5.0)
    snapshot_every: int = 0
    name: str = "scenario"

    def __post_init__(self):
        if not self.duration > 0:
            raise DomainError("duration must be > 0")
        if self.epoch_length < 2:
            raise DomainError("epoch_length must be >= 2")
        if not self.sample_rate > 0:
            raise DomainError("sample_rate must be > 0")
        if not (self.mass_M > 0 and self.quality_Q > 0):
            raise DomainError("mass_M and quality_Q must be > 0")

    @property
    def epoch_duration(self):
        return self.epoch_length / self.sample_rate

    @property
    def n_epochs(self):
        return max(int(np.floor(self.duration / self.epoch_duration + 1e-9)), 1)

    def free_plant(self, actuator=None):
        """Plant with the shunt disconnected (open electrodes)."""
        act = actuator or self.actuator
        return MechanicalPlant.from_quality(act.open_circuit_spring, self.mass_M, self.quality_Q)


@dataclass(frozen=True, eq=False)
class SteadyState:
    u2_over_u1: np.ndarray
    force_F: np.ndarray
    voltage_V: np.ndarray
    delta_l: np.ndarray
    k_eff: np.ndarray


def shunted_stiffness(omega, actuator, negcap):
    """Complex ``K_eff`` at angular frequency ``omega``; open electrodes for ``negcap=None``."""
    if negcap is None:
        return np.full(np.shape(omega), actuator.open_circuit_spring, dtype=complex)
    z = negcap_impedance(negcap, omega)
    zs = actuator.impedance(omega)
    try:
        return np.asarray(effective_spring_constant(z, zs, actuator.spring_K_S, actuator.coupling_k2).k_eff)
    except PoleError:
        w = np.atleast_1d(omega)
        den = np.abs(1.0 - actuator.coupling_k2 + np.atleast_1d(zs / z))
        raise PoleError("effective stiffness pole", float(w[np.argmin(den)] / TWO_PI)) from None


def steady_state_response(omega, actuator, negcap, mass_M, quality_Q):
    """Harmonic response per unit incident displacement.

    ``negcap=None`` means the shunt is disconnected. Returns displacement
    ratio, transmitted force ``F = K_eff * dl``, shunt voltage and elongation
    ``dl = u2 - u1``. The voltage follows from ``dl = F/K_S + d V``.

    Per frequency this is :func:`~shuntdamp.mechanics.transfer_complex` on
    ``MechanicalPlant.from_quality(K_eff, M, Q)``, evaluated in one pass.
    """
    w = np.asarray(omega, dtype=float)
    if np.any(w <= 0):
        raise DomainError("omega must be > 0")
    k = shunted_stiffness(w, actuator, negcap)
    mag = np.abs(k)
    damping = np.sqrt(mag * mass_M) / quality_Q
    den = k - mass_M * w * w + 1j * w * damping
    if np.any(den == 0):
        raise SingularityError("plant transfer singular")
    h = (1j * w * damping + k) / den
    dl = h - 1.0
    force = k * dl
    volt = (dl - force / actuator.spring_K_S) / actuator.piezo_d
    return SteadyState(u2_over_u1=h, force_F=force, voltage_V=volt, delta_l=dl, k_eff=k)


def transmissibility(freqs, actuator, negcap, mass_M, quality_Q):
    """``|u2/u1|`` on a frequency grid in Hz."""
    f = check_frequencies(freqs)
    return np.abs(steady_state_response(TWO_PI * f, actuator, negcap, mass_M, quality_Q).u2_over_u1)


def suppression_db(freqs, actuator, negcap, mass_M, quality_Q):
    """Transmissibility level change versus the disconnected actuator, in dB."""
    tr_nc = transmissibility(freqs, actuator, negcap, mass_M, quality_Q)
    tr_s = transmissibility(freqs, actuator, None, mass_M, quality_Q)
    with np.errstate(divide="ignore"):
        return 20.0 * (np.log10(tr_nc) - np.log10(tr_s))


def transmissibility_sweep(scenario, freq_grid, negcap="scenario", t=0.0):
    """Transmissibility points with the circuit state frozen at time ``t``."""
    f = check_frequencies(freq_grid)
    if np.any(f > MODEL_VALID_MAX_HZ):
        warnings.warn(
            f"frequencies above {MODEL_VALID_MAX_HZ:g} Hz lie outside the fitted model range",
            RuntimeWarning,
            stacklevel=2,
        )
    act = apply_drift(scenario.actuator, scenario.drift, t)
    nc = scenario.negcap if isinstance(negcap, str) else negcap
    tr = transmissibility(f, act, nc, scenario.mass_M, scenario.quality_Q)
    return [TransmissibilityPoint(float(fi), float(ti)) for fi, ti in zip(f, tr)]


@dataclass(frozen=True)
class OracleResult:
    r0: float
    r1: float
    k_eff_ratio: float
    on_boundary: bool = False


def _k_ratio(negcap, actuator, omega, r0, r1):
    nc = negcap.with_resistors(r0, r1)
    k = shunted_stiffness(np.asarray(omega), actuator, nc)
    return complex(k) / actuator.spring_K_S


def tune_optimal_oracle(scenario, omega0, center=None, span=0.2, n_grid=41, actuator=None):
    """Brute-force ``(R0, R1)`` minimising ``|K_eff(omega0)|``.

    A coarse ``n_grid x n_grid`` search over ``+-span`` around ``center``
    (default: the ideal-op-amp closed-form match) is refined by a
    least-squares solve of ``K_eff = 0`` on the real and imaginary parts.
    """
    act = actuator or scenario.actuator
    negcap = scenario.negcap
    if center is None:
        center = solve_ideal_match(negcap.network, act.impedance(omega0), omega0, negcap.R2)
    c0, c1 = center
    g = np.linspace(1.0 - span, 1.0 + span, n_grid)
    best = (np.inf, 1.0, 1.0)
    for a in g:
        for b in g:
            try:
                v = abs(_k_ratio(negcap, act, omega0, c0 * a, c1 * b))
            except (PoleError, SingularityError, InstabilityError):
                continue
            if v < best[0]:
                best = (v, a, b)
    _, a0, b0 = best
    on_boundary = a0 in (g[0], g[-1]) or b0 in (g[0], g[-1])
    if on_boundary:
        warnings.warn("oracle minimum on the search boundary; widen the search", RuntimeWarning, stacklevel=2)

    def resid(x):
        k = _k_ratio(negcap, act, omega0, c0 * x[0], c1 * x[1])
        return [k.real, k.imag]

    sol = optimize.least_squares(resid, [a0, b0], x_scale=[1e-3, 1e-3], xtol=1e-15, ftol=1e-15, gtol=1e-15)
    a, b = sol.x
    ratio = abs(_k_ratio(negcap, act, omega0, c0 * a, c1 * b))
    if ratio > best[0]:
        a, b, ratio = a0, b0, best[0]
    return OracleResult(r0=float(c0 * a), r1=float(c1 * b), k_eff_ratio=float(ratio), on_boundary=on_boundary)


def tune_band(scenario, band, step_hz=5.0):
    """``(R0, R1)`` minimising the worst suppression level over ``band`` (Hz)."""
    lo, hi = band
    if not 0 < lo < hi:
        raise DomainError("band must satisfy 0 < lo < hi")
    freqs = np.arange(lo, hi + 0.5 * step_hz, step_hz)
    act = scenario.actuator
    ref = transmissibility(freqs, act, None, scenario.mass_M, scenario.quality_Q)
    start = tune_optimal_oracle(scenario, TWO_PI * np.sqrt(lo * hi))

    def worst(x):
        nc = scenario.negcap.with_resistors(start.r0 * x[0], start.r1 * x[1])
        try:
            tr = transmissibility(freqs, act, nc, scenario.mass_M, scenario.quality_Q)
        except (PoleError, SingularityError, InstabilityError):
            return np.inf
        with np.errstate(divide="ignore"):
            return float(np.max(20.0 * np.log10(tr / ref)))

    g = np.linspace(0.9, 1.1, 21)
    grid = min((worst((a, b)), a, b) for a in g for b in g)
    res = optimize.minimize(worst, grid[1:], method="Nelder-Mead",
                            options={"xatol": 1e-7, "fatol": 1e-6, "initial_simplex": [
                                [grid[1], grid[2]], [grid[1] * 1.01, grid[2]], [grid[1], grid[2] * 1.01]]})
    x = res.x if res.fun <= grid[0] else grid[1:]
    return float(start.r0 * x[0]), float(start.r1 * x[1]), float(min(res.fun, grid[0]))


def initial_negcap(scenario):
    """Circuit values at the start of a run, per the scenario's tuning block."""
    t = scenario.tuning
    nc = scenario.negcap
    w0 = TWO_PI * t.frequency
    if t.method == "design":
        if not isinstance(nc.network, NarrowNetwork):
            raise DomainError("closed-form design needs the narrow reference network")
        r0, r1 = design_resistors(w0, scenario.actuator.cap_C_S, scenario.actuator.series_R_S,
                                  nc.R2, nc.network.R3, nc.network.C0)
    elif t.method == "oracle":
        o = tune_optimal_oracle(scenario, w0)
        r0, r1 = o.r0, o.r1
    elif t.method == "band":
        r0, r1, _ = tune_band(scenario, t.band)
    else:
        r0, r1 = nc.R0, nc.R1
    return nc.with_resistors(r0 * t.r0_scale, r1 * t.r1_scale)


def model_phase_probe(scenario, omega, actuator=None):
    """``probe(r0, r1) -> arg K_eff`` on the scenario's circuit model."""
    act = actuator or scenario.actuator

    def probe(r0, r1):
        return float(np.angle(_k_ratio(scenario.negcap, act, omega, r0, r1)))

    return probe


def calibrate_scenario(scenario, frequency=None):
    """Model-based ``(phi0, phi1)`` around the oracle optimum at ``frequency``."""
    f = frequency or scenario.tuning.frequency
    w = TWO_PI * f
    opt = tune_optimal_oracle(scenario, w)
    probe = model_phase_probe(scenario, w)
    phi0, phi1 = control.calibrate_thresholds(probe, opt.r0, opt.r1, scenario.control.calibration_radius)
    return phi0, phi1, opt


@dataclass(frozen=True)
class SimLogRow:
    time: float
    r0: float
    r1: float
    k_eff_ratio: float
    arg_k_eff: float
    suppression_db: float
    dominant_hz: float
    converged: bool


SIMLOG_COLUMNS = ("time_s", "r0_ohm", "r1_ohm", "k_eff_ratio", "arg_k_eff_rad",
                  "suppression_db", "dominant_hz", "converged")


@dataclass
class SimLog:
    rows: list = field(default_factory=list)
    seed: int = 0
    label: str = ""
    spectra: list = field(default_factory=list)
    final_negcap: NegCapParams = None
    final_state: control.ControlState = None

    def __len__(self):
        return len(self.rows)

    def column(self, name):
        return np.array([getattr(r, name) for r in self.rows])

    def as_records(self):
        return [(r.time, r.r0, r.r1, r.k_eff_ratio, r.arg_k_eff, r.suppression_db,
                 r.dominant_hz, int(r.converged)) for r in self.rows]


def _resistor_range(curve):
    return curve.resistance_range if curve is not None else (0.0, np.inf)


def _epoch_signals(u1, act, negcap, scenario):
    """Force and voltage spectra for incident spectrum ``u1`` (bins > DC)."""
    freqs = u1.bin_frequencies
    pos = freqs > 0
    force = np.zeros_like(u1.bins)
    volt = np.zeros_like(u1.bins)
    ss = steady_state_response(TWO_PI * freqs[pos], act, negcap, scenario.mass_M, scenario.quality_Q)
    force[pos] = ss.force_F * u1.bins[pos]
    volt[pos] = ss.voltage_V * u1.bins[pos]

    def frame(b):
        return SpectrumFrame(bin_frequencies=freqs, bins=b, n_samples=u1.n_samples, sample_rate=u1.sample_rate)

    return frame(force), frame(volt)


def check_pole_crossing(actuator, negcap, scenario, epoch=None):
    """Raise :class:`InstabilityError` once a pole of ``K_eff(s)`` leaves the left half-plane.

    These are the roots of ``(1 - k2) Z(s) + Z_S(s)``, evaluated with the
    ideal op-amp; see :mod:`shuntdamp.stability`.
    """
    poles = closed_loop_poles(actuator, negcap, scenario.mass_M, scenario.quality_Q).electrical
    if poles.size and np.max(poles.real) >= 0.0:
        p = poles[np.argmax(poles.real)]
        raise InstabilityError(
            f"shunt loop pole crossed into the right half-plane near {abs(p.imag) / TWO_PI:.0f} Hz "
            f"(R0 = {negcap.R0:.6g}, R1 = {negcap.R1:.6g})", epoch=epoch)


def run_adaptive_scenario(scenario, control_enabled=None):
    """Run the closed (or open) loop epoch by epoch and return its log.

    Raises
    ------
    InstabilityError
        When the circuit crosses a pole; carries the epoch index.
    """
    enabled = scenario.control_enabled if control_enabled is None else control_enabled
    cs = scenario.control
    negcap = initial_negcap(scenario)
    act0 = scenario.actuator

    phi0, phi1 = cs.phi0, cs.phi1
    if enabled and (phi0 is None or phi1 is None):
        c0, c1, _ = calibrate_scenario(scenario, scenario.tuning.frequency)
        phi0 = c0 if phi0 is None else phi0
        phi1 = c1 if phi1 is None else phi1
    state = control.ControlState.initial(
        negcap.R0, negcap.R1, phi0 or 0.0, phi1 or 0.0, step_fraction=cs.step_fraction,
        adaptive_steps=cs.adaptive_steps, min_step_fraction=cs.min_step_fraction,
        grow_after=cs.grow_after, r0_range=_resistor_range(cs.r0_curve),
        r1_range=_resistor_range(cs.r1_curve))

    thresholds_for = None
    if enabled and cs.retarget_thresholds:
        cache = {}

        def thresholds_for(f):
            key = round(f, 6)
            if key not in cache:
                cache[key] = calibrate_scenario(scenario, f)[:2]
            return cache[key]

    rng = np.random.Generator(np.random.PCG64(scenario.seed))
    log = SimLog(seed=scenario.seed, label="adaptive" if enabled else "static")
    proxies = []
    t_ep = scenario.epoch_duration
    d_piezo = act0.piezo_d
    for i in range(scenario.n_epochs):
        t = i * t_ep
        act = apply_drift(act0, scenario.drift, t)
        nc = negcap.with_resistors(state.r0, state.r1)
        check_pole_crossing(act, nc, scenario, epoch=i)
        u1_ts = _synthesize_epoch(scenario, t, rng)
        u1 = spectrum(u1_ts)
        try:
            fspec, vspec = _epoch_signals(u1, act, nc, scenario)
        except (PoleError, SingularityError, InstabilityError) as exc:
            raise InstabilityError(f"circuit unstable: {exc}", epoch=i) from exc
        f_ts = inverse_spectrum(fspec)
        v_ts = inverse_spectrum(vspec)

        est = None
        if enabled:
            new_state, est = control.broadband_step(
                f_ts, v_ts, state, cs.force_threshold, window=cs.window,
                f_min=cs.f_min, f_max=cs.f_max, thresholds_for=thresholds_for)
        else:
            new_state = state
            est = control.dominant_component(spectrum(f_ts), spectrum(v_ts), cs.force_threshold,
                                             f_min=cs.f_min, f_max=cs.f_max)
        if est.valid:
            proxy = est.force_amplitude / (act.spring_K_S * d_piezo * max(abs(est.voltage_phasor), 1e-300))
        else:
            proxy = 0.0
        proxies.append(proxy)
        converged = control.has_converged(proxies, cs.convergence_ratio)

        w_tr = TWO_PI * max(est.frequency, 1e-9)
        ss = steady_state_response(w_tr, act, nc, scenario.mass_M, scenario.quality_Q)
        ref = steady_state_response(w_tr, act, None, scenario.mass_M, scenario.quality_Q)
        k = complex(ss.k_eff)
        tr_nc = abs(complex(ss.u2_over_u1))
        tr_s = abs(complex(ref.u2_over_u1))
        level = suppression_level(tr_nc, tr_s) if tr_nc > 0 else float("-inf")
        log.rows.append(SimLogRow(time=t, r0=state.r0, r1=state.r1, k_eff_ratio=abs(k) / act.spring_K_S,
                                  arg_k_eff=float(np.angle(k)), suppression_db=level,
                                  dominant_hz=est.frequency, converged=converged))
        if scenario.snapshot_every and (i % scenario.snapshot_every == 0 or i == scenario.n_epochs - 1):
            free_f, _ = _epoch_signals(u1, act, None, scenario)
            log.spectra.append((t, fspec.bin_frequencies, np.abs(free_f.bins), np.abs(fspec.bins)))
        state = replace(new_state, converged=converged)

    log.final_state = state
    log.final_negcap = negcap.with_resistors(state.r0, state.r1)
    return log


def _synthesize_epoch(scenario, t, rng):
    spec = scenario.excitation
    n = scenario.epoch_length
    fs = scenario.sample_rate
    base = synthesize(ExcitationSpec(tones=spec.tones), fs, n / fs, start_time=t)
    if spec.noise_rms > 0:
        return TimeSeries(fs, base.samples + spec.noise_rms * rng.standard_normal(n))
    return base


def force_spectra(scenario, negcap, t=0.0, seed=None):
    """Force amplitude spectra, disconnected vs shunted, for one epoch."""
    rng = np.random.Generator(np.random.PCG64(scenario.seed if seed is None else seed))
    act = apply_drift(scenario.actuator, scenario.drift, t)
    u1 = spectrum(_synthesize_epoch(scenario, t, rng))
    free_f, _ = _epoch_signals(u1, act, None, scenario)
    shunt_f, _ = _epoch_signals(u1, act, negcap, scenario)
    return u1.bin_frequencies, np.abs(free_f.bins), np.abs(shunt_f.bins)


def default_narrow_scenario(**overrides):
    """Reference narrow-band set-up: fitted actuator and circuit at 2 kHz."""
    kwargs = {
        "actuator": ActuatorParams(spring_K_S=7.11e7, cap_C_S=6.602e-6, coupling_k2=0.064,
                                series_R_S=1.150),
        "negcap": NegCapParams(R0=2.43e3, R1=6.86, R2=2.40e3,
                            network=NarrowNetwork(R3=27.84, C0=4.686e-6), opamp=LF356N),
        "mass_M": 1.67,
        "quality_Q": 11.3,
        "excitation": ExcitationSpec(tones=((2000.0, 1.0, 0.0),)),
        "name": "narrow_2khz",
    }
    kwargs.update(overrides)
    return Scenario(**kwargs)


def default_broad_scenario(**overrides):
    """Reference broad-band set-up with the four-element reference network."""
    base = default_narrow_scenario()
    kwargs = {
        "actuator": replace(base.actuator, coupling_k2=0.067),
        "negcap": NegCapParams(R0=12.6e3, R1=2.6, R2=2.40e3,
                            network=BroadNetwork(R3=15.09e3, C0=480e-9, RX=44.6, CX=807e-9),
                            opamp=LF356N),
        "mass_M": base.mass_M,
        "quality_Q": base.quality_Q,
        "excitation": base.excitation,
        "tuning": TuningSettings(method="band"),
        "name": "broad_band",
    }
    kwargs.update(overrides)
    return Scenario(**kwargs)
