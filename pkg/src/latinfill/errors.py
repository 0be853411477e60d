class LatinError(Exception):
    """Base class for all latinfill errors."""


class BeforeMismatch(LatinError):
    pass


class ImproperCommit(LatinError):
    pass


class UnbalancedDelta(LatinError):
    """A delta that would change the symbol content of some row or column."""


class InvalidTransversal(LatinError):
    pass


class TemplateMismatch(LatinError):
    """An intercalate the construction relies on is missing."""


class UnsupportedOrder(LatinError):
    pass


class NoEligibleTrade(LatinError):
    pass


class Infeasible(LatinError):
    pass


class CompletionFailed(LatinError):
    """The trade path gave up on some cell and no fallback was allowed."""


class OracleFailed(LatinError):
    pass


class GenerationFailed(LatinError):
    pass
