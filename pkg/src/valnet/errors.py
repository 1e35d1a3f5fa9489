"""Exception hierarchy shared by every valnet module."""


class ValnetError(Exception):
    """Base class for all valnet errors."""


class AlgebraMismatchError(ValnetError):
    pass


class DomainError(ValnetError):
    pass


class UnsupportedOperationError(ValnetError):
    pass


class InconsistentRemovalError(ValnetError):
    pass


class NormalizationError(ValnetError):
    pass


class NetworkError(ValnetError):
    """Raised when a valuation network fails validation."""


class UnknownVariableError(NetworkError):
    pass


class HeadConflictError(NetworkError):
    pass


class ConditionalCycleError(NetworkError):
    pass


class StructureOnlyError(NetworkError):
    """An operation needed tables but the network carries structure only."""


class GraphError(ValnetError):
    """Invalid UG / DAG / DBG / RCG input."""


class ModelSyntaxError(ValnetError):
    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")


class TableLengthError(ValnetError):
    pass
