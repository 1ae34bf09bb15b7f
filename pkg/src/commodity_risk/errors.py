"""Exception hierarchy shared by every module."""

from __future__ import annotations


class CommodityRiskError(Exception):
    """Base class for all library errors."""


class DataError(CommodityRiskError):
    """Input data could not be turned into a valid series."""


class ModelingError(CommodityRiskError):
    """A model could not be fitted or forecast."""


# -- data ------------------------------------------------------------------

class MalformedRow(DataError):
    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


class EmptyInput(DataError):
    pass


class DuplicateDate(DataError):
    def __init__(self, date):
        super().__init__(f"duplicate date {date}")
        self.date = date


class GapDetected(DataError):
    def __init__(self, month: str):
        super().__init__(f"no contract covers month {month}")
        self.month = month


class OverlapDetected(DataError):
    def __init__(self, date):
        super().__init__(f"two contracts contribute date {date}")
        self.date = date


class EmptyIntersection(DataError):
    pass


class HoldoutTooLarge(DataError):
    pass


class MissingExogenous(DataError):
    pass


# -- numerics --------------------------------------------------------------

class TooShort(ModelingError, ValueError):
    pass


class AnchorMismatch(ModelingError, ValueError):
    pass


class ZeroVariance(ModelingError, ValueError):
    pass


class DofNonPositive(ModelingError, ValueError):
    pass


class LengthMismatch(ModelingError, ValueError):
    pass


class DomainError(ModelingError, ValueError):
    pass


class NonFiniteObjective(ModelingError):
    def __init__(self, x):
        super().__init__(f"objective is not finite at {list(x)!r}")
        self.x = x


class MaxIterations(ModelingError):
    pass


# -- models ----------------------------------------------------------------

class NonConvergence(ModelingError):
    pass


class ExogLengthMismatch(ModelingError, ValueError):
    pass


class MissingFutureExog(ModelingError, ValueError):
    pass


class StationarityViolated(ModelingError, ValueError):
    pass


class HessianSingular(ModelingError):
    pass


class AllModelsFailed(ModelingError):
    pass


class UnknownFormat(CommodityRiskError, ValueError):
    pass
