"""Exception hierarchy shared by every module of the package."""


class ShuntDampError(Exception):
    """Base class for all errors raised by shuntdamp."""


class DomainError(ShuntDampError, ValueError):
    """An argument lies outside the domain of the operation."""


class SingularityError(ShuntDampError, ZeroDivisionError):
    """A formula was evaluated at (or numerically at) a singular point."""


class PoleError(SingularityError):
    """The shunted actuator sits on the pole of its effective stiffness.

    This is the negative-capacitance stability edge: the denominator of the
    effective spring constant vanishes and the stiffness diverges.
    """

    def __init__(self, message, frequency=None):
        if frequency is not None:
            message = f"{message} (at {frequency:.6g} Hz)"
        super().__init__(message)
        self.frequency = frequency


class InstabilityError(ShuntDampError):
    """The negative-capacitor circuit is at its own instability point."""

    def __init__(self, message, epoch=None):
        if epoch is not None:
            message = f"{message} (epoch {epoch})"
        super().__init__(message)
        self.epoch = epoch


class InfeasibleDesignError(ShuntDampError, ValueError):
    """Closed-form circuit design produced a non-physical component value."""


class CalibrationError(ShuntDampError):
    """Phase-threshold calibration found a model inconsistent with the law."""


class InvalidEstimateError(ShuntDampError, ValueError):
    """A phase estimate was requested from a zero phasor."""


class ScenarioError(ShuntDampError, ValueError):
    """A scenario file could not be parsed or failed validation."""

    def __init__(self, message, line=None, key=None):
        if line is not None:
            message = f"line {line}: {message}"
        if key is not None:
            message = f"{message} [key: {key}]"
        super().__init__(message)
        self.line = line
        self.key = key
