"""Exception hierarchy. Every error raised by the package derives from NVPumpError."""


class NVPumpError(Exception):
    """Base class; `stage` names the pipeline step that failed, when known."""

    def __init__(self, message, stage=None):
        super().__init__(message)
        self.stage = stage

    def __str__(self):
        msg = super().__str__()
        return f"{self.stage}: {msg}" if self.stage else msg


class InvalidRateError(NVPumpError, ValueError):
    pass


class InvalidStateError(NVPumpError, ValueError):
    pass


class InvariantViolation(NVPumpError, ArithmeticError):
    """A propagated state left the probability simplex beyond round-off."""


class NonFiniteResultError(NVPumpError, ArithmeticError):
    pass


class BadParameterError(NVPumpError, ValueError):
    pass


class ConvergenceError(NVPumpError, RuntimeError):
    pass


class DegenerateFixedPointError(NVPumpError, ArithmeticError):
    pass


class UnsupportedStateError(NVPumpError, ValueError):
    pass


class FitError(NVPumpError, RuntimeError):
    pass


class ConfigError(NVPumpError, ValueError):
    pass
