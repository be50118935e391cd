"""Exception hierarchy shared by all modules."""


class ShiftwalkError(Exception):
    """Base class for errors raised by shiftwalk."""


class ConfigError(ShiftwalkError, ValueError):
    """Invalid parameters or configuration."""


class ValidationError(ShiftwalkError):
    """A map lacks a property required by the requested operation."""


class NumericalError(ShiftwalkError, ArithmeticError):
    """A numerical procedure failed to reach its target accuracy."""
