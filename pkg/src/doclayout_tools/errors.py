"""Exception hierarchy shared by every module."""


class LayoutToolsError(Exception):
    """Base class for all domain errors raised by the toolkit."""


class UnknownCategory(LayoutToolsError, ValueError):
    pass


class ParseError(LayoutToolsError, ValueError):
    pass


class SchemaError(LayoutToolsError, ValueError):
    pass


class DanglingReference(SchemaError):
    """An annotation points at an image id that is not in the image list."""


class ScoreRange(LayoutToolsError, ValueError):
    pass


class RangeError(LayoutToolsError, ValueError):
    pass


class IoError(LayoutToolsError, OSError):
    pass


class MixedImage(LayoutToolsError, ValueError):
    pass


class NoGroundTruth(LayoutToolsError, ValueError):
    pass


class EmptyDataset(LayoutToolsError, ValueError):
    pass


class IdCollision(LayoutToolsError, ValueError):
    pass


class ShapeMismatch(LayoutToolsError, ValueError):
    pass


class Divergence(LayoutToolsError, ArithmeticError):
    pass


class WrongImage(LayoutToolsError, ValueError):
    pass
