"""Exception types raised across the package."""


class TPeskinError(Exception):
    """Base class for all package errors."""


class AliasingError(TPeskinError, ValueError):
    """A grid is too coarse to represent the requested band limit."""


class MeanZeroError(TPeskinError, ValueError):
    """A negative-order norm was requested for a field with nonzero mean."""


class PositivityFailure(TPeskinError, ArithmeticError):
    """A numerical state lost strict positivity."""


class StepUnderflow(TPeskinError, ArithmeticError):
    """The adaptive time step fell below the minimum allowed value."""


class ConfigError(TPeskinError, ValueError):
    """Invalid run configuration or string configuration."""


class InputError(TPeskinError, ValueError):
    """Invalid numerical input (non-finite samples, mass mismatch, ...)."""


class FlowCrossingError(TPeskinError, ArithmeticError):
    """Advected particles changed order; the flow map is not monotone."""


class ChecksumError(TPeskinError):
    """An emitted run file is missing or does not match its manifest entry."""
