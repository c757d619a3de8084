"""Exception hierarchy shared by all rankbridge modules."""


class RankBridgeError(Exception):
    """Base class for every error raised by this package."""


class DivisionByZero(RankBridgeError, ZeroDivisionError):
    pass


class BadIndex(RankBridgeError, IndexError):
    pass


class ShapeMismatch(RankBridgeError, ValueError):
    pass


class ValidationError(RankBridgeError, ValueError):
    """Malformed input data (problem files, partial matrices, designators)."""


class DependentGenerators(ValidationError):
    """The pure-tensor generators of U are linearly dependent."""


class InconsistentDecomposition(RankBridgeError, ValueError):
    """A decomposition does not expand to the tensor it claims to represent."""


class SpanningFailure(RankBridgeError, ArithmeticError):
    """Third-mode factors of a decomposition fail to span together with e_{s+1}."""


class BudgetExceeded(RankBridgeError, RuntimeError):
    def __init__(self, message, required=None, limit=None):
        super().__init__(message)
        self.required = required
        self.limit = limit


class ExceedsMax(RankBridgeError, RuntimeError):
    """No decomposition exists with at most ``max_rank`` terms."""

    def __init__(self, message, max_rank=None, stats=None):
        super().__init__(message)
        self.max_rank = max_rank
        self.stats = stats


class NoFitFound(RankBridgeError, RuntimeError):
    def __init__(self, message, best_residual=None):
        super().__init__(message)
        self.best_residual = best_residual
