"""Exception types raised across the package."""


class HorolabError(Exception):
    """Base class for every error raised by horolab."""


class DimensionMismatch(HorolabError, ValueError):
    pass


class DegenerateChord(HorolabError, ValueError):
    pass


class NotInterior(HorolabError, ValueError):
    pass


class NotOnBoundary(HorolabError, ValueError):
    pass


class PointOutsideDomain(HorolabError, ValueError):
    pass


class NonpositiveCoordinate(HorolabError, ValueError):
    pass


class ParameterOutOfRange(HorolabError, ValueError):
    pass


class IncompatibleMapSpace(HorolabError, TypeError):
    pass


class ImageEscapedDomain(HorolabError, ArithmeticError):
    pass


class UndecidedWithinBudget(HorolabError, RuntimeError):
    """A finite orbit was neither clearly bounded nor clearly escaping."""


class MixedVerdicts(HorolabError, RuntimeError):
    pass


class DisagreeingLimits(HorolabError, RuntimeError):
    pass


class NotEscaping(HorolabError, RuntimeError):
    pass


class NoSamplesFound(HorolabError, RuntimeError):
    pass


class PreconditionNotMet(HorolabError, ValueError):
    pass


class ConfigInvalid(HorolabError, ValueError):
    """Configuration rejected; ``path`` locates the offending field."""

    def __init__(self, path, reason):
        self.path = path
        self.reason = reason
        super().__init__(f"{path}: {reason}")
