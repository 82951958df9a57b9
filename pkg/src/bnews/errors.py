"""Exception hierarchy shared by all bnews modules."""


class BnewsError(Exception):
    """Base class for all library errors."""


class InvalidArgumentError(BnewsError, ValueError):
    """An argument violates a documented precondition."""


class DegenerateMapError(BnewsError):
    """A root search hit a map that is (numerically) the identity."""


class NotFoundError(BnewsError):
    """A requested object (fixed point, invariant set) does not exist."""


class PreconditionViolationError(BnewsError):
    """A structural precondition failed on computed data.

    Carries the offending location when known (e.g. a critical point
    inside a candidate invariant set).
    """

    def __init__(self, message, location=None):
        super().__init__(message)
        self.location = location


class ConvergenceFailureError(BnewsError):
    """Set iteration did not settle within the iteration budget."""

    def __init__(self, message, last_distance=None):
        super().__init__(message)
        self.last_distance = last_distance


class DivergenceError(BnewsError):
    """A trajectory escaped its guard region."""

    def __init__(self, message, escape_index=None):
        super().__init__(message)
        self.escape_index = escape_index


class InsufficientSamplesError(BnewsError):
    """Too few accepted samples in one of the estimator windows."""

    def __init__(self, message, k1=0, k2=0):
        super().__init__(message)
        self.k1 = k1
        self.k2 = k2


class UnstableSupportError(BnewsError):
    """Empirical support of a series has not stabilised."""


class CapabilityError(BnewsError):
    """An operation needs data (e.g. second derivatives) that was not supplied."""


class NoReturnError(BnewsError):
    """A section-return integration exceeded its step budget."""


class ConfigError(BnewsError):
    """A configuration file or flag combination is invalid (CLI exit 2)."""
