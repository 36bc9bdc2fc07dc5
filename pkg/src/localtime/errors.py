"""Exception hierarchy.

Input problems derive from :class:`InputValidationError`, numerical or
mathematical failures from :class:`ComputationError`. The CLI maps the two
families to distinct exit codes.
"""


class LocalTimeError(Exception):
    pass


class InputValidationError(LocalTimeError, ValueError):
    pass


class ComputationError(LocalTimeError, ArithmeticError):
    pass


class InvalidGraph(InputValidationError):
    pass


class NegativeEntry(InputValidationError):
    def __init__(self, row, col, value=None):
        self.row, self.col, self.value = row, col, value
        super().__init__(f"negative entry at ({row}, {col}): {value}")


class RowSumViolation(InputValidationError):
    def __init__(self, row, total):
        self.row, self.sum = row, total
        super().__init__(f"row {row} sums to {total!r}, expected 1")


class ZeroRow(InputValidationError):
    def __init__(self, vertex):
        self.vertex = vertex
        super().__init__(f"vertex {vertex} has no outgoing weight")


class NotStronglyConnected(ComputationError):
    pass


class SingularSystem(ComputationError):
    pass


class DenominatorVanishes(ComputationError):
    pass


class ExtrapolationDiverged(ComputationError):
    pass


class UnreachableEndpoint(ComputationError):
    """Normalizing a fixed-endpoint average whose weight <1> is zero."""


class NoAcceptedPaths(ComputationError):
    pass


class DivisionByZeroSeries(ComputationError, ZeroDivisionError):
    pass


class TruncationExceeded(ComputationError):
    def __init__(self, n, order):
        self.n, self.order = n, order
        super().__init__(f"coefficient w^{n} requested but series is known only up to w^{order}")
