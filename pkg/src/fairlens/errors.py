"""Exception types shared across the package."""


class FairlensError(Exception):
    """Base class for all package-specific errors."""


class NotPositiveDefinite(FairlensError):
    """Covariance matrix has no Cholesky factorization."""


class NotSymmetric(FairlensError):
    """Covariance matrix is asymmetric beyond tolerance."""


class DimensionMismatch(FairlensError):
    """Vector/matrix dimensions are inconsistent."""


class LengthMismatch(FairlensError):
    """Input data columns have unequal lengths."""


class TooFewSamples(FairlensError):
    """Not enough observations for the requested test."""


class EmptyBin(FairlensError):
    """A conditioning bin has fewer points than the test requires."""


class OutOfRange(FairlensError):
    """A numeric argument lies outside its admissible range."""


class ConfigError(FairlensError):
    """Invalid run or test configuration."""


class QuadratureError(FairlensError):
    """Adaptive quadrature failed to converge at the requested tolerance."""
