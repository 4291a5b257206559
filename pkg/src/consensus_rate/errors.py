"""Exception hierarchy shared by every module of the package."""


class ConsensusError(Exception):
    """Base class for all errors raised by consensus_rate."""


class ValidationError(ConsensusError):
    """Input data does not describe a valid stochastic system."""


class NotSquare(ValidationError):
    def __init__(self, shape):
        self.shape = tuple(shape)
        super().__init__(f"matrix is not square: shape {self.shape}")


class NegativeEntry(ValidationError):
    def __init__(self, k, l, value):
        self.k, self.l, self.value = k, l, value
        super().__init__(f"negative entry gamma[{k},{l}] = {value!r}")


class RowSumViolation(ValidationError):
    def __init__(self, k, total):
        self.k, self.total = k, total
        super().__init__(f"row {k} sums to {total!r}, not 1")


class DimensionMismatch(ConsensusError):
    pass


class HorizonExceeded(ConsensusError):
    def __init__(self, t, horizon=None):
        self.t, self.horizon = t, horizon
        super().__init__(f"time index {t} outside horizon {horizon}")


class NotPeriodic(ConsensusError):
    pass


class InvalidSchedule(ConsensusError):
    pass


class NoSchedule(ConsensusError):
    pass


class SearchBudgetExceeded(ConsensusError):
    pass


class PreconditionViolated(ConsensusError):
    pass


class SubStochasticityViolated(ConsensusError):
    pass


class UnknownExample(ConsensusError):
    pass


class ParamOutOfRange(ConsensusError):
    pass


class DegenerateDraw(ConsensusError):
    pass
