"""Exception hierarchy shared by every dualent module."""


class DualentError(Exception):
    """Base class for all domain errors raised by dualent."""


class ZeroState(DualentError, ValueError):
    """Both amplitudes of a two-particle state vanish."""


class VariableClash(DualentError, ValueError):
    """Label and entangled variables carry the same name."""


class InvalidPositions(DualentError, ValueError):
    """An exchange addresses operator positions that do not exist."""


class ModeMismatch(DualentError, ValueError):
    """Two Fock expansions live on different mode sets or statistics."""


class InvalidDensity(DualentError, ValueError):
    """A matrix is not a valid 4x4 density operator."""


class WrongStateShape(DualentError, ValueError):
    """A state does not have the structure an operation requires."""


class EmptyCounts(DualentError, ValueError):
    """No coincidences were recorded for a setting pair."""


class ConfigError(DualentError, ValueError):
    """An experiment or CLI configuration is invalid."""
