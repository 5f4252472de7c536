"""Closed-loop poles of the shunted actuator in the Laplace domain.

Every element of the model is rational in ``s``: the series-RC actuator
``Z_S = R_S + 1/(s C_S)``, the RC reference networks and the single-pole
op-amp. Two characteristic polynomials follow:

* electrical loop with the stack elongation held fixed,
  ``(1 - k2) Z + Z_S = 0`` (the poles of ``K_eff(s)``);
* the full isolator, ``(M s^2 + B s) ((1 - k2) Z + Z_S) + K_S (Z + Z_S) = 0``
  with ``B`` the viscous damping of the disconnected element.

The stability check uses the ideal op-amp by default. The single-pole gain
model also yields a real pole near the gain-bandwidth product (several MHz),
the intrinsic positive-feedback mode of the converter, which lies far above
the band where that amplifier model means anything.
"""

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as P

from .circuit import BroadNetwork
from .mechanics import damping_from_quality

#: Frequency scale (rad/s) used to keep polynomial coefficients well conditioned.
S_SCALE = 2.0 * np.pi * 1000.0


def _actuator_poly(act):
    return np.array([1.0, act.series_R_S * act.cap_C_S * S_SCALE]), np.array([0.0, act.cap_C_S * S_SCALE])


def _network_poly(net):
    if isinstance(net, BroadNetwork):
        branch = np.array([1.0, net.RX * net.CX * S_SCALE])
        den = P.polyadd(P.polymul([1.0 / net.R3, net.C0 * S_SCALE], branch), [0.0, net.CX * S_SCALE])
        return branch, den
    return np.array([net.R3]), np.array([1.0, net.C0 * net.R3 * S_SCALE])


def negcap_polynomials(negcap, ideal_opamp=True):
    """Numerator and denominator of ``Z(s)`` in powers of ``s / S_SCALE``."""
    z1n, z1d = _network_poly(negcap.network)
    r0, r1, r2 = negcap.R0, negcap.R1, negcap.R2
    if ideal_opamp or negcap.opamp is None:
        gn, gd = np.array([-r2]), np.array([r0])
    else:
        w1 = 2.0 * np.pi * negcap.opamp.pole_f1
        a0 = negcap.opamp.dc_gain_A0
        base = P.polymul([w1, S_SCALE], [r0 + r2])
        gn = P.polyadd(base, [a0 * w1 * r2])
        gd = P.polyadd(base, [-a0 * w1 * r0])
    zd = P.polymul(gd, z1d)
    zn = P.polyadd(r1 * zd, P.polymul(gn, z1n))
    return zn, zd


@dataclass(frozen=True)
class PoleReport:
    electrical: np.ndarray
    isolator: np.ndarray

    @property
    def max_real(self):
        """Largest real part over both pole sets (1/s)."""
        return float(max(np.max(self.electrical.real, initial=-np.inf),
                         np.max(self.isolator.real, initial=-np.inf)))

    @property
    def stable(self):
        return self.max_real < 0.0

    @property
    def critical_frequency(self):
        """Frequency (Hz) of the least-damped pole."""
        allp = np.concatenate([self.electrical, self.isolator])
        return float(abs(allp[np.argmax(allp.real)].imag) / (2.0 * np.pi))


def closed_loop_poles(actuator, negcap, mass_M, quality_Q, ideal_opamp=True):
    """Poles (rad/s) of the shunted actuator and of the loaded isolator."""
    zn, zd = negcap_polynomials(negcap, ideal_opamp)
    sn, sd = _actuator_poly(actuator)
    k2 = actuator.coupling_k2
    electrical = P.polyadd((1.0 - k2) * P.polymul(zn, sd), P.polymul(sn, zd))
    summed = P.polyadd(P.polymul(zn, sd), P.polymul(sn, zd))
    b = damping_from_quality(actuator.open_circuit_spring, mass_M, quality_Q)
    mech = np.array([0.0, b * S_SCALE, mass_M * S_SCALE**2])
    full = P.polyadd(P.polymul(mech, electrical), actuator.spring_K_S * summed)
    return PoleReport(electrical=_roots(electrical) * S_SCALE, isolator=_roots(full) * S_SCALE)


def _roots(c):
    c = np.trim_zeros(np.asarray(c, dtype=float), "b")
    k = 0
    while k < c.size - 1 and c[k] == 0.0:
        k += 1
    return P.polyroots(c[k:]) if c.size - k > 1 else np.array([], dtype=complex)


def is_stable(actuator, negcap, mass_M, quality_Q):
    return closed_loop_poles(actuator, negcap, mass_M, quality_Q).stable
