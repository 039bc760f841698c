"""Exception types shared across the package."""


class DualCertError(Exception):
    """Base class for every error raised by dualcert."""


class BudgetExceeded(DualCertError):
    """An enumeration or dense expansion would exceed the configured budget."""


class ShapeMismatch(DualCertError, ValueError):
    pass


class ComplexLeak(DualCertError):
    """A rational result was requested from complex-valued data."""


class InfeasibleInput(DualCertError):
    """A construction was handed a certificate that does not verify.

    The failing report is attached as ``report``.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class DivisibilityError(DualCertError, ValueError):
    pass


class PreconditionError(DualCertError, ValueError):
    pass


class NoRoot(DualCertError):
    """No admissible parameter exists; ``max_eps`` carries the largest legal epsilon."""

    def __init__(self, message, max_eps=None):
        super().__init__(message)
        self.max_eps = max_eps


class DegenerateInput(DualCertError):
    pass


class UnsupportedField(DualCertError, ValueError):
    pass
