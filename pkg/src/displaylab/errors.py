"""Exception hierarchy shared by all modules."""


class DisplayLabError(Exception):
    """Base class for every error raised by the library."""


class MathError(DisplayLabError):
    pass


class ResourceGuard(DisplayLabError):
    """A desk-scale limit was exceeded before any work was done."""


# wittring
class LevelTooLarge(ResourceGuard):
    pass


class RingMismatch(MathError):
    pass


class LengthMismatch(MathError):
    pass


class LengthTooShort(MathError):
    pass


class NotInI(MathError):
    pass


class NotInIdeal(MathError):
    pass


class NotAUnit(MathError):
    pass


# display
class InvalidParabolic(MathError):
    pass


class ShapeMismatch(MathError):
    pass


class LevelMismatch(MathError):
    pass


class SearchSpaceTooLarge(ResourceGuard):
    pass


class DegenerateInterpolation(MathError):
    pass


class NotNilpotent(MathError):
    pass


class NoSolution(MathError):
    pass


class NotSameReduction(MathError):
    pass


# gradedfrob
class WidthMismatch(MathError):
    pass


class RankMismatch(MathError):
    pass


class PeriodMismatch(MathError):
    pass


class UnsupportedBase(MathError):
    pass


class WeightOutOfRange(MathError):
    pass


class NotUnitary(MathError):
    pass


# flex
class InvalidMultidegree(MathError):
    pass


class InvalidGauge(MathError):
    pass


class InsufficientLevel(MathError):
    pass


class WidthExceedsP(MathError):
    pass


class TranslationMultidegree(MathError):
    pass


class IterationLeavesParabolic(MathError):
    pass


class EvenSubset(MathError):
    pass


# newton
class InsufficientPrecision(MathError):
    pass


class NotFiniteField(MathError):
    pass


class TotalMismatch(MathError):
    pass


class SampleAtPole(MathError):
    pass
