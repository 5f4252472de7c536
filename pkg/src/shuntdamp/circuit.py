"""Negative-capacitor shunt: op-amp gain, reference networks, design formulas.

The circuit presents ``Z = R1 + (R0 + R2 + A R2) / (R0 + R2 - A R0) * Z1`` at
its terminals, which for an ideal op-amp reduces to ``R1 - (R2/R0) Z1``.
"""

import warnings
from dataclasses import dataclass, replace

import numpy as np

from .exceptions import DomainError, InfeasibleDesignError, InstabilityError
from .validation import check_positive


@dataclass(frozen=True)
class OpAmpModel:
    """Single-pole open-loop gain ``A0 / (1 + j w / (2 pi f1))``."""

    dc_gain_A0: float
    pole_f1: float

    def __post_init__(self):
        if not self.dc_gain_A0 > 1:
            raise DomainError(f"dc_gain_A0 must be > 1, got {self.dc_gain_A0}")
        check_positive(self.pole_f1, "pole_f1")

    @classmethod
    def from_db(cls, gain_db, pole_f1):
        return cls(dc_gain_A0=10.0 ** (gain_db / 20.0), pole_f1=pole_f1)

    @property
    def gain_db(self):
        return 20.0 * np.log10(self.dc_gain_A0)


#: LF356N-class amplifier: 105 dB open-loop gain, 100 Hz dominant pole.
LF356N = OpAmpModel.from_db(105.0, 100.0)


def opamp_gain(omega, model):
    w = np.asarray(omega, dtype=float)
    if np.any(w < 0):
        raise DomainError("omega must be >= 0")
    a = model.dc_gain_A0 / (1.0 + 1j * w / (2.0 * np.pi * model.pole_f1))
    return complex(a) if np.ndim(a) == 0 else a


@dataclass(frozen=True)
class NarrowNetwork:
    """Reference impedance ``R3 || C0``."""

    R3: float
    C0: float

    def __post_init__(self):
        check_positive(self.R3, "R3")
        check_positive(self.C0, "C0")

    def impedance(self, omega):
        w = np.asarray(omega, dtype=float)
        return self.R3 / (1.0 + 1j * w * self.C0 * self.R3)


@dataclass(frozen=True)
class BroadNetwork:
    """Reference impedance ``R3 || C0 || (RX + CX)``.

    The extra series RX-CX branch adds a loss term whose real part stays
    nearly flat over the working band, so the scaled network tracks a series
    RC actuator far better than ``R3 || C0`` alone. With the branch removed
    (``RX -> inf`` or ``CX -> 0``) it reduces to :class:`NarrowNetwork`.
    """

    R3: float
    C0: float
    RX: float
    CX: float

    def __post_init__(self):
        for name in ("R3", "C0", "RX", "CX"):
            check_positive(getattr(self, name), name)

    def impedance(self, omega):
        w = np.asarray(omega, dtype=float)
        branch = 1.0 / (self.RX + 1.0 / (1j * w * self.CX))
        return 1.0 / (1.0 / self.R3 + 1j * w * self.C0 + branch)


def z1_impedance(network, omega):
    w = np.asarray(omega, dtype=float)
    if np.any(w <= 0):
        raise DomainError("omega must be > 0")
    z = network.impedance(w)
    return complex(z) if np.ndim(z) == 0 else z


@dataclass(frozen=True)
class NegCapParams:
    """Component values of the negative capacitor.

    ``opamp=None`` selects the ideal (infinite gain) amplifier.
    """

    R0: float
    R1: float
    R2: float
    network: object
    opamp: OpAmpModel = None

    def __post_init__(self):
        for name in ("R0", "R1", "R2"):
            check_positive(getattr(self, name), name)

    def with_resistors(self, R0, R1):
        return replace(self, R0=R0, R1=R1)


def negcap_impedance(params, omega):
    """Terminal impedance of the negative capacitor (ohm)."""
    z1 = z1_impedance(params.network, omega)
    r0, r1, r2 = params.R0, params.R1, params.R2
    if params.opamp is None:
        return r1 - (r2 / r0) * z1
    a = opamp_gain(omega, params.opamp)
    den = r0 + r2 - a * r0
    if np.any(np.abs(den) <= 1e-12 * (r0 + r2)):
        raise InstabilityError("op-amp loop denominator R0 + R2 - A R0 vanishes")
    return r1 + (r0 + r2 + a * r2) / den * z1


def design_resistors(omega0, cap_C_S, series_R_S, R2, R3, C0):
    """Closed-form ``(R0, R1)`` cancelling a series-RC actuator at ``omega0``.

    Assumes the narrow ``R3 || C0`` reference network and an ideal op-amp.

    Raises
    ------
    InfeasibleDesignError
        If the required ``R1`` is not positive (``R_S`` too large).
    """
    for name, v in (("omega0", omega0), ("cap_C_S", cap_C_S), ("R2", R2), ("R3", R3), ("C0", C0)):
        check_positive(v, name)
    check_positive(series_R_S, "series_R_S", strict=False)
    w2 = omega0 * omega0
    r0 = w2 * C0 * cap_C_S * R2 * R3**2 / (1.0 + w2 * C0**2 * R3**2)
    r1 = 1.0 / (w2 * C0 * cap_C_S * R3) - series_R_S
    if r1 <= 0:
        raise InfeasibleDesignError(
            f"R1 = {r1:.6g} ohm <= 0: series resistance too large at this frequency"
        )
    return float(r0), float(r1)


def solve_ideal_match(network, z_actuator, omega, R2):
    """``(R0, R1)`` making the ideal circuit equal ``-Z_S`` at one frequency.

    Works for any reference network: the imaginary part fixes the mirror
    ratio ``R2/R0`` and the real part then fixes ``R1``.
    """
    z1 = z1_impedance(network, omega)
    zs = complex(z_actuator)
    if z1.imag == 0:
        raise InfeasibleDesignError("reference network is purely resistive here")
    ratio = zs.imag / z1.imag
    if ratio <= 0:
        raise InfeasibleDesignError("reference network has the wrong reactance sign")
    r1 = ratio * z1.real - zs.real
    if r1 <= 0:
        raise InfeasibleDesignError(f"R1 = {r1:.6g} ohm <= 0")
    return float(R2 / ratio), float(r1)


def matching_error(z_negcap, z_actuator):
    """Relative mismatch ``(Z + Z_S) / Z_S``."""
    zs = np.asarray(z_actuator, dtype=complex)
    if np.any(zs == 0):
        raise DomainError("actuator impedance must be nonzero")
    e = (np.asarray(z_negcap, dtype=complex) + zs) / zs
    return complex(e) if np.ndim(e) == 0 else e


@dataclass(frozen=True)
class AdjustableResistorCurve:
    """Volt-ohm characteristic of an LED/photoresistor pair.

    ``R(v) = r_min + (r_max - r_min) exp(-v / v_ref)`` on ``control_range``.
    """

    r_min: float
    r_max: float
    v_ref: float = 1.0
    control_range: tuple = (0.0, 10.0)

    def __post_init__(self):
        check_positive(self.r_min, "r_min")
        check_positive(self.v_ref, "v_ref")
        if not self.r_max > self.r_min:
            raise DomainError("r_max must exceed r_min")
        lo, hi = self.control_range
        if not hi > lo:
            raise DomainError("control_range must be increasing")

    @property
    def resistance_range(self):
        """Attainable ``(low, high)`` resistance over the control range."""
        lo, hi = self.control_range
        return self.resistance(hi), self.resistance(lo)

    def resistance(self, v_c):
        return resistance_from_control_voltage(v_c, self)

    def control_voltage(self, resistance):
        return control_voltage_for(resistance, self)


def resistance_from_control_voltage(v_c, curve):
    lo, hi = curve.control_range
    if not lo <= v_c <= hi:
        warnings.warn(
            f"control voltage {v_c} V outside [{lo}, {hi}] V; clamped",
            RuntimeWarning,
            stacklevel=2,
        )
        v_c = min(max(v_c, lo), hi)
    return curve.r_min + (curve.r_max - curve.r_min) * np.exp(-v_c / curve.v_ref)


def control_voltage_for(resistance, curve):
    """Control voltage that produces ``resistance`` (inverse characteristic)."""
    if not curve.r_min < resistance <= curve.r_max:
        raise DomainError(
            f"resistance {resistance} outside ({curve.r_min}, {curve.r_max}]"
        )
    return float(-curve.v_ref * np.log((resistance - curve.r_min) / (curve.r_max - curve.r_min)))
