"""Exception hierarchy shared across the package.

Every failure mode that callers are expected to branch on gets its own
class; the CLI maps these onto distinct exit codes.
"""


class QprobeError(Exception):
    """Base class for all package-specific errors."""


class ParameterError(QprobeError):
    """A physical parameter or setting is outside its allowed domain."""


class ConfigError(QprobeError):
    """Malformed run specification (unknown key, bad type, conflicting flags)."""


class TruncationError(QprobeError):
    """The Fock-space cutoff is inadequate for the requested state.

    Carries the norm (or weight) deficit so callers can report how bad
    the truncation actually is.
    """

    def __init__(self, message, deficit=None):
        super().__init__(message)
        self.deficit = deficit


class TruncationLeakError(TruncationError):
    """Population leaked into the top Fock level during evolution."""

    def __init__(self, message, step=None, population=None):
        super().__init__(message, deficit=population)
        self.step = step
        self.population = population


class IntegrationError(QprobeError):
    """Numerical integration failed a consistency monitor."""


class TraceDriftError(IntegrationError):
    """Trace of the density matrix drifted beyond tolerance."""

    def __init__(self, message, step=None, drift=None):
        super().__init__(message)
        self.step = step
        self.drift = drift


class InfeasibleError(QprobeError):
    """Requested run cannot proceed (e.g. branch excursion exceeds the
    truncation guard, or thermal sampling rejects too many draws)."""
