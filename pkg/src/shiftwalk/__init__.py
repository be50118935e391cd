"""Random walks generated by iterating shift-periodic interval maps."""
from .errors import ConfigError, NumericalError, ShiftwalkError, ValidationError
from .maps import ShiftPeriodicMap, builtin, evaluate, validate

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "NumericalError", "ShiftwalkError", "ValidationError",
    "ShiftPeriodicMap", "builtin", "evaluate", "validate", "__version__",
]
