"""Shared exception types.

Every hard budget in the package fails loudly through one of these
instead of silently truncating an allegedly exhaustive enumeration.
"""


class MorseForgeError(Exception):
    pass


class MixedFactor(MorseForgeError):
    """Two factor elements from different factor groups were combined."""


class NoBoundary(MorseForgeError):
    """The factor group has no boundary directions."""


class NoLine(MorseForgeError):
    """The factor group has no usable bi-infinite geodesic through the basepoint."""


class EmptyWord(MorseForgeError):
    """The operation needs a non-trivial word."""


class ParseError(MorseForgeError):
    """Unparseable word, element or tail text."""


class CapExceeded(MorseForgeError):
    """An enumeration produced more results than the caller allowed."""

    def __init__(self, count: int, message: str = ""):
        self.count = count
        super().__init__(message or f"enumeration produced {count} results, above the cap")


class BudgetExceeded(MorseForgeError):
    """A configured hard budget (vertices, path length, depth) is too small."""


class PossiblyTruncated(MorseForgeError):
    """The ball cannot certify that a distance or path family is fully inside it."""

    def __init__(self, in_ball_distance=None, message: str = ""):
        self.in_ball_distance = in_ball_distance
        super().__init__(
            message
            or f"value {in_ball_distance} observed inside the ball cannot be certified exact"
        )


class GridMiss(MorseForgeError):
    """A table gauge lacks a sample point required by a derived constant."""


class RealizationCapExceeded(MorseForgeError):
    """A vertex has more realizations than the membership check allows."""


class BallTooSmall(MorseForgeError):
    """A constructed path would leave the ball."""


class EndpointsOutsideFactor(MorseForgeError):
    """Path projection needs both endpoints inside the embedded factor copy."""


class DepthBudgetExceeded(MorseForgeError):
    """A matching step could not be certified within the truncation budget."""


class Unmatched(MorseForgeError):
    """The element has not been matched, or carries no matched geodesic."""


class DepthExceedsContent(MorseForgeError):
    """A truncated combinatorial geodesic has no content at the requested depth."""
