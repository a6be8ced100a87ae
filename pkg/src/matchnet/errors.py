"""Exception types shared across the package."""


class MatchnetError(Exception):
    """Base class for all package-specific errors."""


class ParameterError(MatchnetError, ValueError):
    """A model parameter is outside its admissible range."""


class ConfigurationError(MatchnetError, ValueError):
    """A required configuration field is missing or malformed."""


class DegenerateProfileError(MatchnetError, ValueError):
    """An operation was evaluated at a profile with zero aggregate effort."""


class UnsupportedVariantError(MatchnetError, ValueError):
    """The requested variant is not defined for the given model."""


class SolverFailureError(MatchnetError, RuntimeError):
    """A root finder could not locate a solution it was guaranteed to find."""


class InvariantViolationError(MatchnetError, RuntimeError):
    """A quantity that is provably signed or bounded came out otherwise."""


class TranscriptionMismatchError(MatchnetError, RuntimeError):
    """A closed-form expression disagrees with its independent numerical check."""


class StencilCrossingError(MatchnetError, RuntimeError):
    """A finite-difference stencil crossed out of the existence region."""
