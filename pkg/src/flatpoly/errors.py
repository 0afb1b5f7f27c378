"""Exception hierarchy.

Every domain error carries a stable ``code`` (the class name) so the CLI can
report it verbatim and map it to exit status 2.
"""


class FlatPolyError(Exception):
    """Base class for all domain errors raised by flatpoly."""

    @property
    def code(self):
        return type(self).__name__


class EmptyPolynomial(FlatPolyError):
    pass


class GridTooCoarse(FlatPolyError):
    pass


class DuplicateExponent(FlatPolyError):
    pass


class DegenerateHLConstant(FlatPolyError):
    pass


class ZeroNotInsideDisk(FlatPolyError):
    pass


class SecondDerivativeNotBoundedAway(FlatPolyError):
    pass


class RootFindingDiverged(FlatPolyError):
    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals


class FactorizationInconsistent(FlatPolyError):
    pass


class LogSingularOnGrid(FlatPolyError):
    pass


class ConstantModulus(FlatPolyError):
    pass


class GramIdentityViolation(FlatPolyError):
    pass


class NotUnitNorm(FlatPolyError):
    pass


class ExpansionTooLarge(FlatPolyError):
    pass


class InvalidGramSum(FlatPolyError):
    pass


class SeriesLengthMismatch(FlatPolyError):
    pass
