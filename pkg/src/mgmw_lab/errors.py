"""Exception types shared across the package."""


class MgmwLabError(Exception):
    """Base class for all package errors."""


class InvalidMultiuserPair(MgmwLabError):
    """A declared multiuser pair does not share exactly one node."""


class NotStrictlyConvexPoint(MgmwLabError):
    """A fixed multiuser rate pair is dominated by time sharing."""


class UndefinedWeight(MgmwLabError):
    """Weight query with both queues zero."""


class RegionNotFixed(MgmwLabError):
    """Operation requires every multiuser region to be a fixed rate point."""


class TooLargeForExact(MgmwLabError):
    """Graph exceeds the size guard for exhaustive enumeration."""


class UnknownScheduler(MgmwLabError):
    """Scheduler id not recognised."""


class ConvexityViolated(MgmwLabError):
    """Pair rates violate the strict convexity condition needed here."""


class ConstructionFailed(MgmwLabError):
    """An adversarial-traffic construction could not be completed."""


class BadEpsilon(MgmwLabError):
    """Event probability outside the admissible range."""


class CornerOperatingPoint(MgmwLabError):
    """A variable-rate operating point must not sit at a region corner."""


class BadConfig(MgmwLabError):
    """Experiment configuration is malformed; message names the field."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")
