"""Exception types raised across the package."""


class SojournError(Exception):
    """Base class for all package errors."""


class CoalescentRoots(SojournError):
    """Characteristic roots too close together for alpha to be defined."""


class DomainError(SojournError, ValueError):
    pass


class ConvergenceError(SojournError):
    pass


class ContourError(SojournError):
    pass


class NearPole(SojournError):
    pass


class DegenerateAlpha(SojournError):
    pass


class SingularSystem(SojournError):
    pass


class NoBracket(SojournError):
    pass


class RegimeError(SojournError, ValueError):
    pass


class StepUnderflow(SojournError):
    pass


class IllConditioned(SojournError):
    pass


class ContourCollision(SojournError):
    pass


class WindowTooEarly(SojournError):
    pass


class InvalidInitial(SojournError, ValueError):
    pass
