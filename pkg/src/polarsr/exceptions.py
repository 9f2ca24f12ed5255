"""Exception types shared across the package."""


class PolarSRError(Exception):
    """Base class for package errors."""


class ConfigurationError(PolarSRError, ValueError):
    """Malformed axes, shapes, files or experiment configuration."""


class ParameterError(PolarSRError, ValueError):
    """A numeric parameter lies outside its admissible range."""


class SessionError(PolarSRError, RuntimeError):
    """Successive-cancellation session used out of order."""


class OracleSizeError(PolarSRError, ValueError):
    """Brute-force enumeration refused because the instance is too large."""


class DigestMismatchError(PolarSRError, ValueError):
    """Payload was produced with a different index partition."""


class ValidationError(PolarSRError, ValueError):
    """A joint distribution fails the conditions a scheme requires."""
