"""Iterative tuning law for the two negative-capacitor resistors.

Around the optimal pair ``(R0_min, R1_min)`` the argument of the effective
stiffness rotates monotonically as the working point circles the optimum,
so a single phase reading tells which way each resistor has to move. The
law nudges ``R0`` and ``R1`` by fixed increments according to where the
phase falls relative to two thresholds ``phi0`` and ``phi1``.

Phase comparisons are made on the circle: ``d0 = wrap(phi - phi0)`` and
``d1 = wrap(phi - phi1)`` with ``wrap`` onto ``(-pi, pi]``. ``R0`` decreases
for ``d0`` in ``[0, pi]`` and increases otherwise; ``R1`` decreases for
``d1 >= 0`` and increases otherwise. Boundary phases therefore always take
the decreasing branch.
"""

from dataclasses import dataclass, replace

import numpy as np

from .exceptions import CalibrationError, DomainError, InvalidEstimateError
from .signals import spectrum
from .validation import check_same_sampling


def wrap_phase(phi):
    """Map angles onto ``(-pi, pi]``."""
    out = np.pi - np.mod(np.pi - np.asarray(phi, dtype=float), 2.0 * np.pi)
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class ControlState:
    """Resistances, step sizes and bookkeeping of the tuner.

    ``step_dr0``/``step_dr1`` are the current increments. With
    ``adaptive_steps`` they halve on every reversal of direction (down to
    ``min_step_fraction`` of the nominal step) and double after
    ``grow_after`` consecutive moves in the same direction (up to the
    nominal step), so the loop can both settle finely and follow drift.
    """

    r0: float
    r1: float
    step_dr0: float
    step_dr1: float
    phi0: float = 0.0
    phi1: float = 0.0
    iteration: int = 0
    converged: bool = False
    nominal_dr0: float = None
    nominal_dr1: float = None
    adaptive_steps: bool = True
    min_step_fraction: float = 1.0 / 256.0
    grow_after: int = 3
    r0_range: tuple = (0.0, np.inf)
    r1_range: tuple = (0.0, np.inf)
    last_dir0: int = 0
    last_dir1: int = 0
    run0: int = 0
    run1: int = 0
    clamped: bool = False
    below_threshold: bool = False

    def __post_init__(self):
        if not (self.r0 > 0 and self.r1 > 0):
            raise DomainError("resistances must be > 0")
        if not (self.step_dr0 > 0 and self.step_dr1 > 0):
            raise DomainError("step sizes must be > 0")
        object.__setattr__(self, "phi0", wrap_phase(self.phi0))
        object.__setattr__(self, "phi1", wrap_phase(self.phi1))
        if self.nominal_dr0 is None:
            object.__setattr__(self, "nominal_dr0", self.step_dr0)
        if self.nominal_dr1 is None:
            object.__setattr__(self, "nominal_dr1", self.step_dr1)

    @classmethod
    def initial(cls, r0, r1, phi0, phi1, step_fraction=0.002, **kwargs):
        """Fresh state with steps set to ``step_fraction`` of the resistances."""
        return cls(r0=r0, r1=r1, step_dr0=step_fraction * r0, step_dr1=step_fraction * r1,
                   phi0=phi0, phi1=phi1, **kwargs)


@dataclass(frozen=True)
class PhaseEstimate:
    phi: float
    frequency: float
    force_amplitude: float
    valid: bool
    force_phasor: complex = 0j
    voltage_phasor: complex = 0j


def estimate_arg_keff(force_phasor, voltage_phasor):
    """Stiffness argument estimated as ``arg F - arg V``.

    Near the optimum the elongation is dominated by the piezoelectric term
    ``d V``, so ``F / V`` carries the phase of ``F / elongation``.
    """
    f = complex(force_phasor)
    v = complex(voltage_phasor)
    if f == 0 or v == 0:
        raise InvalidEstimateError("phase of a zero phasor is undefined")
    return wrap_phase(np.angle(f) - np.angle(v))


def _branch(delta, upper_inclusive):
    return -1 if (0.0 <= delta <= np.pi if upper_inclusive else delta >= 0.0) else 1


def _adapt(step, nominal, floor, last, direction, run, grow_after):
    if last == -direction:
        return max(step / 2.0, floor), 1
    run += 1
    if run >= grow_after:
        return min(step * 2.0, nominal), 0
    return step, run


def iterate_law(state, phi):
    """One application of the resistor update law for measured phase ``phi``."""
    d0 = wrap_phase(phi - state.phi0)
    d1 = wrap_phase(phi - state.phi1)
    dir0 = _branch(d0, upper_inclusive=True)
    dir1 = _branch(d1, upper_inclusive=False)

    s0, s1 = state.step_dr0, state.step_dr1
    run0, run1 = state.run0, state.run1
    if state.adaptive_steps:
        s0, run0 = _adapt(s0, state.nominal_dr0, state.nominal_dr0 * state.min_step_fraction,
                          state.last_dir0, dir0, run0, state.grow_after)
        s1, run1 = _adapt(s1, state.nominal_dr1, state.nominal_dr1 * state.min_step_fraction,
                          state.last_dir1, dir1, run1, state.grow_after)

    r0 = state.r0 + dir0 * s0
    r1 = state.r1 + dir1 * s1
    lo0, hi0 = state.r0_range
    lo1, hi1 = state.r1_range
    r0c = min(max(r0, max(lo0, 1e-12)), hi0)
    r1c = min(max(r1, max(lo1, 1e-12)), hi1)
    return replace(
        state,
        r0=r0c,
        r1=r1c,
        step_dr0=s0,
        step_dr1=s1,
        iteration=state.iteration + 1,
        last_dir0=dir0,
        last_dir1=dir1,
        run0=run0,
        run1=run1,
        clamped=(r0c != r0) or (r1c != r1),
        below_threshold=False,
    )


def _circular_mean(a, b):
    return float(np.angle(np.exp(1j * a) + np.exp(1j * b)))


def calibrate_thresholds(plant_probe, r0_center, r1_center, radius_fraction=0.01, n_check=16):
    """Derive ``(phi0, phi1)`` by probing the stiffness argument around a point.

    ``plant_probe(r0, r1)`` must return ``arg K_eff``. The four axis points at
    relative distance ``radius_fraction`` give the half-plane boundaries:
    ``phi0`` separates points with ``R0`` above / below the centre (it is the
    phase reached straight below in ``R1``), ``phi1`` does the same for
    ``R1``. Each boundary is the circular mean of the two antipodal readings.

    Raises
    ------
    CalibrationError
        If the radius is degenerate or the phase does not increase
        monotonically counter-clockwise around the centre.
    """
    if not radius_fraction > 0:
        raise CalibrationError("radius_fraction must be > 0")
    d0 = radius_fraction * r0_center
    d1 = radius_fraction * r1_center
    east = plant_probe(r0_center + d0, r1_center)
    west = plant_probe(r0_center - d0, r1_center)
    north = plant_probe(r0_center, r1_center + d1)
    south = plant_probe(r0_center, r1_center - d1)

    violations = count_ccw_violations(plant_probe, r0_center, r1_center, radius_fraction, n_check)
    if violations:
        raise CalibrationError(
            f"phase is not monotone counter-clockwise around the centre ({violations} violations)"
        )
    phi0 = _circular_mean(south, north - np.pi)
    phi1 = _circular_mean(east, west - np.pi)
    return wrap_phase(phi0), wrap_phase(phi1)


def circle_phases(plant_probe, r0_center, r1_center, radius_fraction, n_points=16):
    """``arg K_eff`` at ``n_points`` counter-clockwise points on a relative circle."""
    theta = 2.0 * np.pi * np.arange(n_points) / n_points
    return np.array([
        plant_probe(r0_center * (1.0 + radius_fraction * np.cos(t)),
                    r1_center * (1.0 + radius_fraction * np.sin(t)))
        for t in theta
    ])


def count_ccw_violations(plant_probe, r0_center, r1_center, radius_fraction, n_points=16):
    """Number of circle steps where the phase fails to advance.

    A cyclically monotone sequence advances by an angle in ``(0, pi)`` at
    every step and winds exactly once in total.
    """
    phases = circle_phases(plant_probe, r0_center, r1_center, radius_fraction, n_points)
    inc = wrap_phase(np.diff(np.append(phases, phases[0])))
    bad = int(np.sum(inc <= 0))
    winding = np.sum(inc) / (2.0 * np.pi)
    if bad == 0 and not np.isclose(winding, 1.0, atol=1e-6):
        bad = 1
    return bad


def dominant_component(frame, voltage_frame=None, threshold=0.0, f_min=None, f_max=None):
    """Largest force bin of a spectrum, optionally restricted to a band.

    Ties resolve to the lowest frequency. The DC bin is never selected.
    Returns a :class:`PhaseEstimate` with ``valid=False`` when the largest
    amplitude is below ``threshold``.
    """
    if len(frame) == 0:
        raise DomainError("empty spectrum")
    amps = np.abs(frame.bins).copy()
    mask = frame.bin_frequencies > 0
    if f_min is not None:
        mask &= frame.bin_frequencies >= f_min
    if f_max is not None:
        mask &= frame.bin_frequencies <= f_max
    if not mask.any():
        raise DomainError("no spectral bins in the requested band")
    amps[~mask] = -np.inf
    idx = int(np.argmax(amps))
    amp = float(amps[idx])
    fphasor = complex(frame.bins[idx])
    vphasor = complex(voltage_frame.bins[idx]) if voltage_frame is not None else 0j
    valid = amp >= threshold and amp > 0
    phi = 0.0
    if valid and vphasor != 0:
        phi = estimate_arg_keff(fphasor, vphasor)
    elif voltage_frame is not None:
        valid = False
    return PhaseEstimate(phi=phi, frequency=float(frame.bin_frequencies[idx]),
                         force_amplitude=amp, valid=valid,
                         force_phasor=fphasor, voltage_phasor=vphasor)


def broadband_step(force_series, voltage_series, state, threshold, window="none",
                   f_min=None, f_max=None, thresholds_for=None):
    """One epoch of the spectral control loop.

    Transforms both signals, picks the dominant force component, estimates
    the stiffness argument there and applies :func:`iterate_law`. When the
    dominant force is below ``threshold`` the state is returned unchanged
    apart from ``below_threshold=True``.

    ``thresholds_for(frequency) -> (phi0, phi1)`` optionally re-targets the
    phase thresholds to the selected frequency.

    Returns
    -------
    (ControlState, PhaseEstimate)
    """
    check_same_sampling(force_series, voltage_series)
    fspec = spectrum(force_series, window)
    vspec = spectrum(voltage_series, window)
    est = dominant_component(fspec, vspec, threshold, f_min=f_min, f_max=f_max)
    if not est.valid:
        return replace(state, below_threshold=True), est
    if thresholds_for is not None:
        phi0, phi1 = thresholds_for(est.frequency)
        state = replace(state, phi0=phi0, phi1=phi1)
    return iterate_law(state, est.phi), est


def has_converged(proxy_history, threshold, consecutive=3):
    """True once the last ``consecutive`` stiffness proxies are all below ``threshold``.

    The proxy is the dominant force amplitude normalised by the piezoelectric
    elongation estimate, ``|F| / (K_S d |V|)``, which tracks ``|K_eff|/K_S``.
    """
    if len(proxy_history) < consecutive:
        return False
    return all(p < threshold for p in list(proxy_history)[-consecutive:])
