"""Exception hierarchy shared by the numerical modules and the CLI."""


class BiphasicError(Exception):
    """Base class for every error raised by this package."""

    module = "biphasic"


class DomainError(BiphasicError, ValueError):
    """An argument lies outside the domain where the operation is defined."""


class RangeError(BiphasicError, OverflowError):
    """The result would overflow double precision."""


class ValidationError(BiphasicError, ValueError):
    """One or more input fields failed validation.

    ``failures`` lists one message per offending field.
    """

    def __init__(self, failures):
        self.failures = list(failures)
        super().__init__("; ".join(self.failures))


class SingularityError(BiphasicError, ArithmeticError):
    """A coefficient denominator collapsed to (numerical) zero."""


class BracketingError(BiphasicError, RuntimeError):
    """No sign change was found where one was guaranteed."""

    def __init__(self, message, interval=None):
        self.interval = interval
        super().__init__(message if interval is None else f"{message} (interval {interval})")


class OracleFailure(BiphasicError, RuntimeError):
    """A numerical oracle could not reach the requested accuracy."""

    def __init__(self, message, diagnostics=None):
        self.diagnostics = dict(diagnostics or {})
        super().__init__(message)


class SearchFailure(BiphasicError, RuntimeError):
    """A root search over a time window found nothing."""

    def __init__(self, message, trace=None):
        self.trace = list(trace or [])
        super().__init__(message)
