"""Adaptive piezoelectric shunt damping with a negative-capacitor circuit.

Submodules
----------
mechanics   single degree-of-freedom transmissibility
actuator    piezoelectric stack impedance and shunted stiffness
circuit     negative-capacitor impedance, design and resistor curves
signals     excitation synthesis and spectra
control     phase-threshold tuning law and broadband step
simulator   steady-state runs, oracles and the closed loop
scenario    scenario file loader
cli         command-line entry point
"""

from .actuator import ActuatorParams, effective_spring_constant
from .circuit import (
    LF356N,
    BroadNetwork,
    NarrowNetwork,
    NegCapParams,
    OpAmpModel,
    negcap_impedance,
)
from .control import ControlState, iterate_law
from .estimators import AdaptiveShuntTuner, ShuntedIsolator
from .exceptions import (
    CalibrationError,
    DomainError,
    InfeasibleDesignError,
    InstabilityError,
    InvalidEstimateError,
    PoleError,
    ScenarioError,
    ShuntDampError,
    SingularityError,
)
from .mechanics import MechanicalPlant, transmissibility_real
from .scenario import load_scenario
from .simulator import (
    Scenario,
    run_adaptive_scenario,
    transmissibility,
    tune_band,
    tune_optimal_oracle,
)

__version__ = "0.1.0"

__all__ = [
    "LF356N",
    "ActuatorParams",
    "AdaptiveShuntTuner",
    "BroadNetwork",
    "CalibrationError",
    "ControlState",
    "DomainError",
    "InfeasibleDesignError",
    "InstabilityError",
    "InvalidEstimateError",
    "MechanicalPlant",
    "NarrowNetwork",
    "NegCapParams",
    "OpAmpModel",
    "PoleError",
    "Scenario",
    "ScenarioError",
    "ShuntDampError",
    "ShuntedIsolator",
    "SingularityError",
    "effective_spring_constant",
    "iterate_law",
    "load_scenario",
    "negcap_impedance",
    "run_adaptive_scenario",
    "transmissibility",
    "transmissibility_real",
    "tune_band",
    "tune_optimal_oracle",
]
