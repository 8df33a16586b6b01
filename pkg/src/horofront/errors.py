"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class HorofrontError(Exception):
    exit_code = 1


class SpecError(HorofrontError):
    """Malformed or inconsistent group/metric/quotient specification."""

    exit_code = 2


class FamilyMismatch(SpecError):
    pass


class HypothesisViolation(HorofrontError):
    """A precondition of a construction is not met (e.g. ``M <= C``)."""

    exit_code = 2

    def __init__(self, message, hypothesis=None):
        super().__init__(message)
        self.hypothesis = hypothesis


class InsufficientScanRadius(HypothesisViolation):
    pass


class NotFiniteOrbit(HypothesisViolation):
    pass


class TrivialRestriction(HorofrontError):
    exit_code = 4


class MemoryCapExceeded(HorofrontError):
    """Ball enumeration would exceed the configured element cap."""

    exit_code = 3

    def __init__(self, message, radius_reached=None, size=None):
        super().__init__(message)
        self.radius_reached = radius_reached
        self.size = size


class RadiusExhausted(HorofrontError):
    exit_code = 3


class ClaimViolation(HorofrontError):
    """A numerically checked mathematical claim failed. Most important signal."""

    exit_code = 4
