"""Exception types raised by the public API.

Every error deliberately subclasses FmrError so callers (and the CLI)
can distinguish computation failures from programming mistakes.
"""


class FmrError(Exception):
    """Base class for all errors raised by this package."""


class UnreadableFile(FmrError):
    """File missing or not decodable as a raster image."""


class UnsupportedFormat(FmrError):
    """Raster or record format not handled."""


class NegativeVariance(FmrError):
    """Noise variance must be non-negative."""


class TooSmall(FmrError):
    """Image too small for disk-domain processing."""


class DegenerateGrid(FmrError):
    """Sinogram grid unusable (too few samples, zero radius, odd V)."""


class ParamError(FmrError):
    """Basis parameters outside their admissible range."""


class StabilityError(FmrError):
    """Direct factorial evaluation requested beyond its stable order."""


class DomainError(FmrError):
    """Basis evaluated outside its radial domain."""


class GridMismatch(FmrError):
    """Sinogram grid does not match the grid an algorithm assumes."""


class UnderResolved(FmrError):
    """Sinogram resolution below the Nyquist guard for the requested order."""


class FractionalPowerOfNegative(FmrError):
    """Fractional exponent applied to negative coordinates."""


class TruncationNotConverged(FmrError):
    """Series tail estimate above the requested tolerance."""


class IncompleteMomentSet(FmrError):
    """Moment set lacks coefficients required by a feature map."""


class ConstraintViolated(FmrError):
    """Invariant-combination constraint not satisfied."""


class NearZeroFactor(FmrError):
    """Invariant combination would divide by a near-zero coefficient."""


class LayoutMismatch(FmrError):
    """Feature vectors with different layouts cannot be compared."""


class EmptyTrainingSet(FmrError):
    """Classifier needs at least one training example."""


class EmptyDataset(FmrError):
    """Benchmark dataset resolved to no usable images."""


class DimMismatch(FmrError):
    """Operands must share the same shape."""


class BadLength(FmrError):
    """Bit-string length invalid for this operation."""


class LengthMismatch(FmrError):
    """Bit-strings must have equal length."""
