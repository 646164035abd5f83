"""Exception hierarchy.

Input problems derive from :class:`InputError` (CLI exit code 2), numerical
failures from :class:`ComputationError` (exit code 3).
"""


class VPWaveError(Exception):
    """Base class for all package errors."""


class InputError(VPWaveError, ValueError):
    pass


class ComputationError(VPWaveError, ArithmeticError):
    pass


class EmptyInput(InputError):
    pass


class ParseError(InputError):
    def __init__(self, row, field, detail=""):
        self.row = row
        self.field = field
        msg = f"row {row}: cannot parse field {field!r}"
        super().__init__(f"{msg}: {detail}" if detail else msg)


class NonPositivePrice(InputError):
    def __init__(self, row, price):
        self.row = row
        super().__init__(f"row {row}: price must be > 0, got {price}")


class EmptyTrades(InputError):
    pass


class OffGridPrice(InputError):
    def __init__(self, row, price, tick):
        self.row = row
        super().__init__(f"row {row}: price {price} is not within half a tick of the {tick} grid")


class NonFinite(InputError):
    pass


class OrderTooLarge(InputError):
    pass


class InvalidParameters(InputError):
    pass


class DegenerateCurve(ComputationError):
    pass


class TooFewLevels(InputError):
    pass


class InsufficientDegreesOfFreedom(InputError):
    pass


class AllStartsDiverged(ComputationError):
    pass


class NotBesselFit(InputError):
    pass


class DimensionMismatch(ComputationError):
    pass


class GridTouchesSingularity(InputError):
    pass


class BracketMiss(ComputationError):
    pass
