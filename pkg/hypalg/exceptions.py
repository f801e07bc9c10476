class HypalgException(Exception):
    """Base exception for hypalg errors."""
    pass


class PoleError(HypalgException):
    """Raised when Gamma is evaluated at (or next to) a non-positive integer."""
    pass


class ParameterError(HypalgException):
    """Raised for invalid parameters: a blocking hypergeometric lower parameter or an inadmissible series label."""
    pass


class DomainError(HypalgException):
    """Raised when an argument lies outside the supported domain."""
    pass


class NonConvergence(HypalgException):
    """Raised when a series or quadrature exhausts its budget before meeting the tolerance."""
    pass


class NumericOverflow(HypalgException):
    """Raised when a finite result cannot be represented in double precision."""
    pass


class UnsupportedSeries(HypalgException):
    """Raised when an operation is requested on the supplementary or trivial series."""
    pass


class IndexRangeError(HypalgException, IndexError):
    """Raised for weights or degrees outside the admissible range of an index."""
    pass


class ParityError(IndexRangeError):
    """Raised when m and n do not share the same parity."""
    pass


class NormalizationError(HypalgException):
    """Raised when a normalisation constant leaves its admissible domain."""
    pass


class DifferentiationError(HypalgException):
    """Raised when a finite-difference stencil would leave the domain rho >= 0."""
    pass


class WindowTooSmall(HypalgException):
    """Raised when a truncated expansion leaves a residual above tolerance."""
    pass


class WindowOverflow(HypalgException):
    """Raised when a bracket needs coefficients outside the table window.

    The bracket computed from the in-window contributions is kept on
    ``partial`` so callers can inspect it.
    """

    def __init__(self, message: str, partial=None):
        super().__init__(message)
        self.partial = partial


class IntegrabilityError(HypalgException):
    """Raised when a product of transferred basis functions is not square-integrable."""
    pass


class ChecksumMismatch(HypalgException):
    """Raised when a cached structure table fails its checksum."""
    pass


class VerificationFailure(HypalgException):
    """Raised when an invariant suite reports a residual above tolerance."""
    pass
