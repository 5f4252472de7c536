"""scikit-learn style wrappers around the isolator model and the tuning loop."""

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from . import control
from .actuator import ActuatorParams
from .circuit import LF356N, NarrowNetwork, NegCapParams, negcap_impedance
from .signals import TimeSeries
from .simulator import (
    TWO_PI,
    Scenario,
    TuningSettings,
    initial_negcap,
    shunted_stiffness,
    transmissibility,
)
from .validation import check_frequencies


class ShuntedIsolator(BaseEstimator):
    """Vibration isolator made of a mass on a shunted piezoelectric stack.

    ``fit(X)`` tunes the negative capacitor for the frequencies in ``X``
    (Hz). A single distinct frequency gets the exact stiffness-cancelling
    optimum; several frequencies get the resistor pair minimising the worst
    transmissibility change over ``[min(X), max(X)]``. ``predict(X)``
    returns the transmissibility ``|u2/u1|`` at ``X``.

    Parameters
    ----------
    spring_K_S, cap_C_S, coupling_k2, series_R_S, loss_tan
        Actuator constants (N/m, F, -, ohm, -).
    mass_M, quality_Q
        Isolated mass (kg) and mechanical quality factor.
    R2 : float
        Fixed resistor of the negative capacitor (ohm).
    network : NarrowNetwork or BroadNetwork, optional
        Reference network; defaults to the fitted narrow-band network.
    opamp : OpAmpModel or None
        Op-amp model; ``None`` means ideal.

    Attributes
    ----------
    r0_, r1_ : float
        Tuned resistances (ohm).
    negcap_ : NegCapParams
    band_ : tuple
        Frequency span the circuit was tuned for.
    """

    def __init__(self, spring_K_S=7.11e7, cap_C_S=6.602e-6, coupling_k2=0.064, series_R_S=1.150,
                 loss_tan=0.0, mass_M=1.67, quality_Q=11.3, R2=2.40e3, network=None, opamp=LF356N):
        self.spring_K_S = spring_K_S
        self.cap_C_S = cap_C_S
        self.coupling_k2 = coupling_k2
        self.series_R_S = series_R_S
        self.loss_tan = loss_tan
        self.mass_M = mass_M
        self.quality_Q = quality_Q
        self.R2 = R2
        self.network = network
        self.opamp = opamp

    def _actuator(self):
        return ActuatorParams(spring_K_S=self.spring_K_S, cap_C_S=self.cap_C_S,
                              coupling_k2=self.coupling_k2, loss_tan=self.loss_tan,
                              series_R_S=self.series_R_S)

    def _scenario(self, tuning):
        network = self.network if self.network is not None else NarrowNetwork(R3=27.84, C0=4.686e-6)
        negcap = NegCapParams(R0=self.R2, R1=1.0, R2=self.R2, network=network, opamp=self.opamp)
        return Scenario(actuator=self._actuator(), negcap=negcap, mass_M=self.mass_M,
                        quality_Q=self.quality_Q, tuning=tuning)

    def fit(self, X, y=None):
        """Tune ``(R0, R1)`` for the frequencies in ``X`` (Hz). ``y`` is ignored."""
        f = np.unique(check_frequencies(X))
        if f.size == 1:
            tuning = TuningSettings(method="oracle", frequency=float(f[0]))
        else:
            tuning = TuningSettings(method="band", frequency=float(f[-1]), band=(float(f[0]), float(f[-1])))
        self.scenario_ = self._scenario(tuning)
        self.negcap_ = initial_negcap(self.scenario_)
        self.r0_, self.r1_ = self.negcap_.R0, self.negcap_.R1
        self.band_ = (float(f[0]), float(f[-1]))
        return self

    def predict(self, X):
        """Transmissibility ``|u2/u1|`` of the tuned isolator at ``X`` (Hz)."""
        check_is_fitted(self, "negcap_")
        return transmissibility(X, self.scenario_.actuator, self.negcap_, self.mass_M, self.quality_Q)

    def predict_free(self, X):
        """Transmissibility with the shunt disconnected."""
        check_is_fitted(self, "negcap_")
        return transmissibility(X, self.scenario_.actuator, None, self.mass_M, self.quality_Q)

    def suppression(self, X):
        """Transmissibility change versus the disconnected actuator, in dB."""
        with np.errstate(divide="ignore"):
            return 20.0 * np.log10(self.predict(X) / self.predict_free(X))

    def stiffness_ratio(self, X):
        """``|K_eff| / K_S`` at ``X`` (Hz)."""
        check_is_fitted(self, "negcap_")
        w = TWO_PI * check_frequencies(X)
        return np.abs(shunted_stiffness(w, self.scenario_.actuator, self.negcap_)) / self.spring_K_S

    def shunt_impedance(self, X):
        check_is_fitted(self, "negcap_")
        return negcap_impedance(self.negcap_, TWO_PI * check_frequencies(X))


class AdaptiveShuntTuner(BaseEstimator):
    """Online tuner for the two negative-capacitor resistors.

    Each call to :meth:`partial_fit` consumes one epoch of transmitted force
    and shunt voltage, locates the dominant force component, estimates the
    stiffness argument there from ``arg F - arg V`` and moves ``R0``/``R1``
    one step.

    Parameters
    ----------
    r0_init, r1_init : float
        Starting resistances (ohm).
    phi0, phi1 : float
        Phase thresholds (rad).
    sample_rate : float
        Sampling rate of the force/voltage records (Hz).
    step_fraction : float
        Nominal step as a fraction of the starting resistances.
    adaptive_steps, min_step_fraction, grow_after
        Step-size adaptation, see :class:`~shuntdamp.control.ControlState`.
    force_threshold : float
        Epochs whose dominant force amplitude falls below this are skipped.
    window : {'none', 'hann'}
    f_min, f_max : float, optional
        Band to which the dominant-component search is restricted.

    Attributes
    ----------
    state_ : ControlState
    estimates_ : list of PhaseEstimate
    """

    def __init__(self, r0_init=2463.74, r1_init=6.21, phi0=0.0, phi1=0.0, sample_rate=16000.0,
                 step_fraction=0.002, adaptive_steps=True, min_step_fraction=1.0 / 256.0, grow_after=3,
                 force_threshold=0.0, window="none", f_min=None, f_max=None):
        self.r0_init = r0_init
        self.r1_init = r1_init
        self.phi0 = phi0
        self.phi1 = phi1
        self.sample_rate = sample_rate
        self.step_fraction = step_fraction
        self.adaptive_steps = adaptive_steps
        self.min_step_fraction = min_step_fraction
        self.grow_after = grow_after
        self.force_threshold = force_threshold
        self.window = window
        self.f_min = f_min
        self.f_max = f_max

    def _init_state(self):
        self.state_ = control.ControlState.initial(
            self.r0_init, self.r1_init, self.phi0, self.phi1, step_fraction=self.step_fraction,
            adaptive_steps=self.adaptive_steps, min_step_fraction=self.min_step_fraction,
            grow_after=self.grow_after)
        self.estimates_ = []

    def partial_fit(self, force, voltage):
        """Apply one control step for a single epoch of samples."""
        if not hasattr(self, "state_"):
            self._init_state()
        f = TimeSeries(self.sample_rate, np.asarray(force, dtype=float).ravel())
        v = TimeSeries(self.sample_rate, np.asarray(voltage, dtype=float).ravel())
        self.state_, est = control.broadband_step(f, v, self.state_, self.force_threshold,
                                                  window=self.window, f_min=self.f_min, f_max=self.f_max)
        self.estimates_.append(est)
        return self

    def fit(self, force_epochs, voltage_epochs):
        """Reset and run the loop over pre-recorded epochs (rows of 2-D arrays)."""
        fe = np.atleast_2d(np.asarray(force_epochs, dtype=float))
        ve = np.atleast_2d(np.asarray(voltage_epochs, dtype=float))
        if fe.shape != ve.shape:
            raise ValueError(f"force and voltage epochs differ in shape: {fe.shape} vs {ve.shape}")
        self._init_state()
        for f, v in zip(fe, ve):
            self.partial_fit(f, v)
        return self

    def predict(self, X=None):
        """Current ``(R0, R1)`` as a length-2 array."""
        check_is_fitted(self, "state_")
        return np.array([self.state_.r0, self.state_.r1])

    @property
    def resistances_(self):
        check_is_fitted(self, "state_")
        return self.state_.r0, self.state_.r1
