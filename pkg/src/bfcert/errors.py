"""Exception types shared across the package."""


class BfCertError(Exception):
    exit_code = 1


class InvalidSpecError(BfCertError, ValueError):
    """A code description is malformed or inconsistent."""

    exit_code = 3


class DimensionError(BfCertError, ValueError):
    exit_code = 3


class DomainError(BfCertError, ValueError):
    exit_code = 3


class ConfigError(BfCertError, ValueError):
    """Decoder thresholds or run plans that violate their contract."""

    exit_code = 3


class GuardError(BfCertError, RuntimeError):
    """An exhaustive routine was asked for an instance it refuses to enumerate."""

    exit_code = 4


class NoKeyFound(BfCertError):
    exit_code = 5
