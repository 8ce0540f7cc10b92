"""Exception types shared across the engine."""


class TimbrespaceError(Exception):
    """Base class for all engine errors."""


class DecodeError(TimbrespaceError):
    """An audio file could not be read or decoded."""


class EmptyInputError(TimbrespaceError):
    """An operation received empty data (zero-length signal, empty directory)."""


class ParameterError(TimbrespaceError):
    """An argument violates an operation's precondition."""


class AliasingError(ParameterError):
    """A synthesis spec places partials above the Nyquist frequency."""


class ZeroVarianceError(TimbrespaceError):
    """Data is degenerate (all points identical) where variance is required."""


class UndefinedDescriptorError(TimbrespaceError):
    """Scalar descriptors are undefined (all-zero spectral envelope)."""


class CapacityError(TimbrespaceError):
    """The canvas cannot fit the requested number of non-overlapping labels."""


class UnresolvedOverlapError(TimbrespaceError):
    """Overlap relaxation did not converge within the iteration cap."""

    def __init__(self, message: str, residual_overlaps: int):
        super().__init__(message)
        self.residual_overlaps = residual_overlaps


class IntegrityError(TimbrespaceError):
    """A client-reported measure disagrees with the server recomputation."""

    def __init__(self, message: str, reported=None, recomputed=None):
        super().__init__(message)
        self.reported = reported
        self.recomputed = recomputed


class ConflictError(TimbrespaceError):
    """A duplicate record was submitted for an already-stored key."""


class DomainError(TimbrespaceError):
    """A value lies outside the mathematical domain of a transform."""


class InsufficientDataError(TimbrespaceError):
    """Too few observations for the requested statistical operation."""
