"""Exception hierarchy shared by all guts modules."""


class GutsError(Exception):
    """Base class for every error raised by this package."""


class InputError(GutsError, ValueError):
    """Malformed or out-of-range input (CLI exit code 2)."""


class ParameterError(InputError):
    """A numeric parameter violates an operation's precondition."""


class InvariantViolation(InputError):
    """A domain object would violate one of its structural invariants."""


class UnsupportedConfigurationError(GutsError):
    """No evaluator exists for the requested configuration (CLI exit code 3)."""
