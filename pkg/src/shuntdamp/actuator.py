"""Piezoelectric actuator: impedance models and shunted effective stiffness."""

import warnings
from dataclasses import dataclass, replace

import numpy as np

from .exceptions import DomainError, PoleError, SingularityError
from .validation import check_positive


@dataclass(frozen=True)
class ActuatorParams:
    """Electromechanical constants of a stack actuator.

    The piezoelectric coefficient is derived from the coupling factor,
    ``d = sqrt(k2 * C_S / K_S)``, so the two can never disagree.

    Attributes
    ----------
    spring_K_S : float
        Spring constant with short-circuited electrodes (N/m).
    cap_C_S : float
        Real part of the free capacitance (F).
    coupling_k2 : float
        Electromechanical coupling factor ``k**2``, in ``(0, 1)``.
    loss_tan : float
        Dielectric loss tangent, used by the exact impedance model.
    series_R_S : float
        Series resistance of the RC impedance approximation (ohm).
    """

    spring_K_S: float
    cap_C_S: float
    coupling_k2: float
    loss_tan: float = 0.0
    series_R_S: float = 0.0

    def __post_init__(self):
        check_positive(self.spring_K_S, "spring_K_S")
        check_positive(self.cap_C_S, "cap_C_S")
        check_positive(self.loss_tan, "loss_tan", strict=False)
        check_positive(self.series_R_S, "series_R_S", strict=False)
        if not 0.0 < self.coupling_k2 < 1.0:
            raise DomainError(f"coupling_k2 must lie in (0, 1), got {self.coupling_k2}")

    @property
    def piezo_d(self):
        return float(np.sqrt(self.coupling_k2 * self.cap_C_S / self.spring_K_S))

    @property
    def open_circuit_spring(self):
        """Stiffness with the electrodes left open, ``K_S / (1 - k2)``."""
        return self.spring_K_S / (1.0 - self.coupling_k2)

    def impedance(self, omega, model="series"):
        if model == "series":
            return actuator_impedance_series(omega, self.series_R_S, self.cap_C_S)
        if model == "exact":
            return actuator_impedance_exact(omega, self.cap_C_S, self.loss_tan)
        raise DomainError(f"unknown impedance model {model!r}")

    def scaled(self, **factors):
        """Copy with the named fields multiplied by the given factors."""
        return replace(self, **{k: getattr(self, k) * v for k, v in factors.items()})


def _check_omega(omega):
    w = np.asarray(omega, dtype=float)
    if np.any(w == 0):
        raise SingularityError("actuator impedance is singular at omega = 0")
    if np.any(w < 0):
        raise DomainError("omega must be > 0")
    return w


def _out(z):
    return complex(z) if np.ndim(z) == 0 else z


def actuator_impedance_exact(omega, cap_C_S, loss_tan):
    """Impedance of a capacitor with constant loss tangent."""
    w = _check_omega(omega)
    check_positive(cap_C_S, "cap_C_S")
    return _out((loss_tan - 1j) / (w * cap_C_S * (1.0 + loss_tan**2)))


def actuator_impedance_series(omega, series_R_S, cap_C_S):
    """Series RC approximation ``R_S + 1/(j w C_S)``."""
    w = _check_omega(omega)
    check_positive(cap_C_S, "cap_C_S")
    return _out(series_R_S + 1.0 / (1j * w * cap_C_S))


@dataclass(frozen=True)
class EffectiveSpring:
    k_eff: complex
    spring_K_S: float

    @property
    def magnitude_ratio(self):
        return np.abs(self.k_eff) / self.spring_K_S

    @property
    def argument(self):
        return np.angle(self.k_eff)


def effective_spring_constant(z_shunt, z_actuator, spring_K_S, coupling_k2, frequency=None):
    """Stiffness of the actuator when its electrodes see impedance ``z_shunt``.

    ``K_eff = K_S (1 + Z_S/Z) / (1 - k2 + Z_S/Z)``; it vanishes when the shunt
    presents exactly ``-Z_S``. Broadcasts over arrays of impedances.

    Raises
    ------
    PoleError
        When the denominator collapses, i.e. the shunt sits on the stability
        edge ``Z = -Z_S / (1 - k2)``.
    """
    z = np.asarray(z_shunt, dtype=complex)
    zs = np.asarray(z_actuator, dtype=complex)
    if np.any(z == 0):
        raise SingularityError("shunt impedance must be nonzero")
    ratio = zs / z
    den = 1.0 - coupling_k2 + ratio
    if np.any(np.abs(den) < 1e-15 * np.maximum(1.0, np.abs(ratio))):
        raise PoleError("effective stiffness pole: 1 - k2 + Z_S/Z = 0", frequency)
    k = spring_K_S * (1.0 + ratio) / den
    return EffectiveSpring(k_eff=_out(k), spring_K_S=spring_K_S)


def sensitivity_approx(delta_Z, z_actuator, spring_K_S, coupling_k2):
    """First-order stiffness for a small impedance mismatch ``delta_Z = Z + Z_S``.

    ``K_eff ~ K_S delta_Z / (k2 Z_S)``; a :class:`RuntimeWarning` flags
    mismatches of 10 % of ``|Z_S|`` or more, where the expansion is poor.
    """
    zs = np.asarray(z_actuator, dtype=complex)
    if np.any(zs == 0):
        raise DomainError("actuator impedance must be nonzero")
    dz = np.asarray(delta_Z, dtype=complex)
    if np.any(np.abs(dz) >= 0.1 * np.abs(zs)):
        warnings.warn(
            "|delta_Z| >= 0.1 |Z_S|: linearised stiffness is unreliable",
            RuntimeWarning,
            stacklevel=2,
        )
    return _out(spring_K_S * dz / (coupling_k2 * zs))


def suppression_estimate(k_eff_ratio):
    """Quick suppression estimate ``10 log10(|K_eff|/K_S)`` in dB."""
    r = np.asarray(k_eff_ratio, dtype=float)
    if np.any(r <= 0):
        raise DomainError("k_eff_ratio must be > 0")
    out = 10.0 * np.log10(r)
    return float(out) if np.ndim(out) == 0 else out


def shunt_voltage(force_F, omega, z_shunt, params, z_actuator=None):
    """Voltage the shunt feeds back to the electrodes for a transmitted force.

    Eliminating the charge from ``Q = dF + C_S V`` and ``V = -Q/C`` gives
    ``V = -dF / (C_S (1 + C/C_S))``. The capacitance ratio is expressed through
    impedances, ``C/C_S = Z_S/Z``, which keeps the result exactly consistent
    with :func:`effective_spring_constant` for whichever actuator impedance
    model is in use (series RC unless ``z_actuator`` is given).

    At a perfect match (``Z = -Z_S``) the force is zero for any finite
    elongation and this mapping is singular; :class:`PoleError` is raised.
    Invert :func:`elongation` instead when the elongation is known.
    """
    if z_actuator is None:
        z_actuator = params.impedance(omega)
    ratio = np.asarray(z_actuator, dtype=complex) / np.asarray(z_shunt, dtype=complex)
    den = params.cap_C_S * (1.0 + ratio)
    if np.any(np.abs(1.0 + ratio) < 1e-15):
        raise PoleError("shunt capacitance cancels the actuator: C + C_S = 0")
    return _out(-params.piezo_d * np.asarray(force_F, dtype=complex) / den)


def elongation(force_F, voltage_V, params):
    """Length change ``F / K_S + d V`` of the stack."""
    f = np.asarray(force_F, dtype=complex)
    v = np.asarray(voltage_V, dtype=complex)
    return _out(f / params.spring_K_S + params.piezo_d * v)
