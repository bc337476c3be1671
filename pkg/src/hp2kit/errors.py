"""Exception types shared across the package."""


class Hp2Error(ValueError):
    """Base class for every error raised by hp2kit."""


class InvalidVertex(Hp2Error):
    pass


class NotASimplex(Hp2Error):
    pass


class OverlappingSupports(Hp2Error):
    pass


class NotPure(Hp2Error):
    pass


class NotAPseudomanifold(Hp2Error):
    pass


class GroupTooLarge(Hp2Error):
    pass


class NotInvariant(Hp2Error):
    pass


class DegreeOutOfRange(Hp2Error):
    pass


class InfeasibleMandatory(Hp2Error):
    pass


class ShapeMismatch(Hp2Error):
    pass


class NotDistinguished(Hp2Error):
    pass


class NotAdmissible(Hp2Error):
    pass


class UnknownEntry(Hp2Error, KeyError):
    def __str__(self) -> str:
        return ValueError.__str__(self)


class ParseError(Hp2Error):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
