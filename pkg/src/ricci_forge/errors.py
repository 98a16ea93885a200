"""Exception types shared across the package."""


class RicciForgeError(Exception):
    """Base class for all errors raised by this package."""


class ConfigurationError(RicciForgeError):
    """Invalid input, override, or missing constant.

    ``clause`` names the violated selection rule (e.g. "Definition 2.1(c)")
    so that callers and reports can point at the exact clause.
    """

    def __init__(self, message, clause=None):
        super().__init__(message)
        self.clause = clause


class CertificationError(RicciForgeError):
    """A required inequality or construction step failed numerically.

    ``check`` carries the label of the failing clause; ``margins`` may carry
    the margins computed before the failure was detected.
    """

    def __init__(self, message, check=None, margins=None):
        super().__init__(message)
        self.check = check
        self.margins = dict(margins) if margins else {}


class DomainError(RicciForgeError, ValueError):
    """Argument outside the mathematical domain of an evaluator."""
