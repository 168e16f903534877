"""Exception hierarchy shared across the package."""


class DepcapError(Exception):
    """Base class for all package-specific errors."""


# --- sequence state / commit rule ---------------------------------------


class CommitToDecodedSlot(DepcapError):
    """A commit targeted a position that already holds a token."""


class MaskTokenCommit(DepcapError):
    """A commit tried to write the mask sentinel as a token."""


# --- denoiser backends ----------------------------------------------------


class EmptyMaskSet(DepcapError):
    """predict() was called on a state with no masked positions."""


class ZeroLikelihood(DepcapError):
    """The observed sequence has probability zero under the model."""


class ParseError(DepcapError):
    """A model file could not be parsed into the expected structure."""


class StochasticityViolation(DepcapError):
    """A probability vector has a negative entry or a row sum off by >1e-6."""


# --- signal math ----------------------------------------------------------


class LengthMismatch(DepcapError):
    """Two vectors that must have equal length do not."""


class NonpositiveLambda(DepcapError):
    """The uncertainty weight must be strictly positive."""


# --- block partitioning ---------------------------------------------------


class MissingPosition(DepcapError):
    """A prediction map does not cover a required window position."""


class EmptyWindow(DepcapError):
    """Block partitioning was requested with no remaining masked tokens."""


# --- parallel selection ---------------------------------------------------


class SamePosition(DepcapError):
    """A conflict score was requested for a candidate against itself."""


class EmptyBlock(DepcapError):
    """A selector was invoked on a block with no masked positions."""


# --- decode engine ----------------------------------------------------------


class NoProgress(DepcapError):
    """A decode step committed zero tokens; selector contracts forbid this."""


class FirstBlock(DepcapError):
    """No block has completed yet, so no influence inputs exist (cold start)."""


# --- brute-force analysis ---------------------------------------------------


class TooLarge(DepcapError):
    """The requested enumeration exceeds the state-space budget."""


# --- CLI / configuration ----------------------------------------------------


class ConfigError(DepcapError):
    """A run configuration failed validation; `field` names the offender."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")
