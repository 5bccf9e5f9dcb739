from typing import Optional


class TropInitError(Exception):
    """Base class for every error raised by this project.
    Each subclass carries a stable machine-readable `code` that the CLI prints as `ERROR <code>: <detail>`."""
    code = "E_INTERNAL"
    # exit status used by the CLI: 1 for bad input, 2 for numerical failures
    exit_status = 1


class InvalidInputError(TropInitError, ValueError):
    code = "E_INPUT"


class DimensionMismatchError(InvalidInputError):
    code = "E_DIM"

    def __init__(self, expected: int, got: int, what: str = "input"):
        super().__init__(f"{what} has dimension {got}, expected {expected}")
        self.expected = expected
        self.got = got


class EmptySetError(InvalidInputError):
    code = "E_EMPTY"


class UndefinedMetricError(InvalidInputError):
    code = "E_UNDEFINED"

    def __init__(self, metric: str, reason: str):
        super().__init__(f"{metric} is undefined: {reason}")
        self.metric = metric


class CliUsageError(InvalidInputError):
    code = "E_FLAG"


class IllConditionedError(TropInitError, ArithmeticError):
    code = "E_ILLCOND"
    exit_status = 2

    def __init__(self, condition: float, ridge: float):
        super().__init__(f"normal equations are ill-conditioned (cond ~ {condition:.3e}, last ridge {ridge:.0e})")
        self.condition = condition
        self.ridge = ridge


class TrainingDivergedError(TropInitError, ArithmeticError):
    code = "E_NAN"
    exit_status = 2

    def __init__(self, epoch: int, batch: int, loss: Optional[float] = None):
        super().__init__(f"non-finite loss {loss} at epoch {epoch}, batch {batch}")
        self.epoch = epoch
        self.batch = batch
        self.loss = loss
