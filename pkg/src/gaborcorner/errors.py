"""Exception types shared across the package."""


class GaborCornerError(Exception):
    """Base class for every package-specific error."""


class ParameterDomainError(GaborCornerError, ValueError):
    """A numeric parameter lies outside its valid domain."""


class ConfigurationError(GaborCornerError, ValueError):
    """Invalid or inconsistent configuration."""


class ModelDomainError(GaborCornerError, ValueError):
    """A corner model violates its angular-partition rules."""


class UnsupportedModelError(ModelDomainError):
    """Region count outside the supported model families."""


class SizeError(GaborCornerError, ValueError):
    """Image and kernel dimensions are incompatible."""


class TransformError(GaborCornerError, ValueError):
    """Degenerate or otherwise unusable affine transform."""


class NumericError(GaborCornerError, ArithmeticError):
    """A numerical computation produced invalid values."""


class ImageFormatError(GaborCornerError, IOError):
    """Unreadable or unsupported image file."""


class UsageError(GaborCornerError):
    """Bad command-line invocation."""
