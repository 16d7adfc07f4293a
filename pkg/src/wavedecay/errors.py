"""Exception hierarchy shared by the wavedecay modules."""


class WaveDecayError(Exception):
    """Base class for all errors raised by this package."""


class InvalidParameterError(WaveDecayError, ValueError):
    """A caller supplied parameters outside the admissible domain."""


class ConsistencyError(WaveDecayError, RuntimeError):
    """An internal cross-check failed. This indicates a bug, not bad input."""


class ConvergenceError(WaveDecayError, RuntimeError):
    """An iterative method hit its iteration cap before converging."""


class CFLError(WaveDecayError, RuntimeError):
    """Time step exceeds the stability limit of the explicit wave update."""


class DampingBoundsError(WaveDecayError, RuntimeError):
    """Evaluated damping left its declared bounds during stepping."""


class InsufficientSamplesError(WaveDecayError, ValueError):
    """Too few usable samples for a decay-rate fit."""


class ConfigError(WaveDecayError, ValueError):
    """A run configuration file is malformed or inconsistent."""
