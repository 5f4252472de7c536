"""Single degree-of-freedom transmissibility model.

The isolated mass ``M`` rests on an isolating element of stiffness ``K`` and
viscous damping ``B``; the base moves with displacement ``u1`` and the mass
responds with ``u2``. Everything here is a pure function of its arguments
and broadcasts over numpy frequency grids.
"""

from dataclasses import dataclass, replace

import numpy as np

from .exceptions import DomainError, SingularityError
from .validation import check_positive


def resonance_frequency(spring_K, mass_M):
    """Undamped natural angular frequency ``sqrt(K/M)`` in rad/s."""
    check_positive(spring_K, "spring_K")
    check_positive(mass_M, "mass_M")
    return float(np.sqrt(spring_K / mass_M))


def damping_from_quality(spring_K, mass_M, quality_Q):
    """Viscous damping ``B = sqrt(K M) / Q`` that yields quality factor ``Q``."""
    check_positive(spring_K, "spring_K")
    check_positive(mass_M, "mass_M")
    check_positive(quality_Q, "quality_Q")
    return float(np.sqrt(spring_K * mass_M) / quality_Q)


def quality_from_damping(spring_K, mass_M, damping_B):
    """Inverse of :func:`damping_from_quality`."""
    check_positive(spring_K, "spring_K")
    check_positive(mass_M, "mass_M")
    check_positive(damping_B, "damping_B")
    return float(np.sqrt(spring_K * mass_M) / damping_B)


def transmissibility_real(omega, omega0, quality_Q):
    """Closed-form steady-state transmissibility ``|u2/u1|`` for real stiffness.

    Parameters
    ----------
    omega : float or ndarray
        Excitation angular frequency (rad/s), ``>= 0``.
    omega0 : float
        Natural angular frequency (rad/s).
    quality_Q : float
        Mechanical quality factor.
    """
    check_positive(omega0, "omega0")
    check_positive(quality_Q, "quality_Q")
    w = np.asarray(omega, dtype=float)
    if np.any(w < 0):
        raise DomainError("omega must be >= 0")
    w2 = w * w
    q2 = quality_Q * quality_Q
    w02 = omega0 * omega0
    num = w2 + q2 * w02
    den = w2 * w02 + q2 * (w02 - w2) ** 2
    tr = omega0 * np.sqrt(num / den)
    return float(tr) if np.ndim(tr) == 0 else tr


@dataclass(frozen=True)
class MechanicalPlant:
    """Mass on a (possibly complex) spring with viscous damping.

    ``spring_K`` is real for a bare elastic element and complex when it holds
    the effective stiffness of a shunted actuator; the imaginary part then
    acts as structural damping on top of ``damping_B``.
    """

    mass_M: float
    damping_B: float
    spring_K: complex

    def __post_init__(self):
        check_positive(self.mass_M, "mass_M")
        check_positive(self.damping_B, "damping_B", strict=False)
        if not np.isfinite(complex(self.spring_K)):
            raise DomainError("spring_K must be finite")

    @classmethod
    def from_quality(cls, spring_K, mass_M, quality_Q):
        """Build a plant whose viscous damping realises quality factor ``Q``.

        For complex ``spring_K`` the modulus sets the damping scale.
        """
        check_positive(quality_Q, "quality_Q")
        check_positive(mass_M, "mass_M")
        k_abs = abs(complex(spring_K))
        damping = np.sqrt(k_abs * mass_M) / quality_Q
        return cls(mass_M=float(mass_M), damping_B=float(damping), spring_K=spring_K)

    @property
    def omega0(self):
        return resonance_frequency(abs(complex(self.spring_K)), self.mass_M)

    @property
    def quality(self):
        return quality_from_damping(abs(complex(self.spring_K)), self.mass_M, self.damping_B)

    def with_spring(self, spring_K, keep="quality"):
        """Swap the spring, holding either the quality factor or the damping.

        ``keep="quality"`` rescales ``B`` as ``sqrt(|K|)`` so the element keeps
        its loss character when its stiffness is changed electrically.
        """
        if keep == "damping":
            return replace(self, spring_K=spring_K)
        if keep == "quality":
            return MechanicalPlant.from_quality(spring_K, self.mass_M, self.quality)
        raise DomainError(f"keep must be 'quality' or 'damping', got {keep!r}")


def transfer_complex(omega, plant):
    """Complex displacement ratio ``u2/u1`` of the harmonic steady state."""
    w = np.asarray(omega, dtype=float)
    if np.any(w < 0):
        raise DomainError("omega must be >= 0")
    k = plant.spring_K
    jwb = 1j * w * plant.damping_B
    den = k - plant.mass_M * w * w + jwb
    scale = abs(k) + plant.mass_M * w * w + abs(jwb)
    if np.any(np.abs(den) <= 1e-15 * np.maximum(scale, np.finfo(float).tiny)):
        raise SingularityError("transfer denominator K - M w^2 + j w B vanishes")
    h = (jwb + k) / den
    return complex(h) if np.ndim(h) == 0 else h


def suppression_level(tr_nc, tr_s):
    """Change in transmissibility level, in dB; negative means suppression."""
    a = np.asarray(tr_nc, dtype=float)
    b = np.asarray(tr_s, dtype=float)
    if np.any(a <= 0) or np.any(b <= 0):
        raise DomainError("transmissibilities must be > 0")
    out = 20.0 * (np.log10(a) - np.log10(b))
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class TransmissibilityPoint:
    frequency: float
    tr_linear: float

    @property
    def tr_db(self):
        if self.tr_linear <= 0:
            return float("-inf")
        return 20.0 * np.log10(self.tr_linear)
