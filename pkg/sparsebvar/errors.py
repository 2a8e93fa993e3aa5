"""Exception hierarchy shared by every sparsebvar module"""
import functools
from typing import Any, Callable, List, Optional, Tuple, TypeVar

F = TypeVar("F", bound=Callable[..., Any])


class SparseBVARError(Exception):
    """Base error. `operation` names the module operation that raised it."""

    def __init__(self, message: str = "", operation: Optional[str] = None):
        super().__init__(message)
        self.operation = operation

    def __str__(self) -> str:
        message = super().__str__()
        if self.operation:
            return f"{self.operation}: {message}"
        return message


def tags_operation(name: str) -> Callable[[F], F]:
    """Attach `name` to any SparseBVARError escaping the wrapped function"""

    def decorator(func: F) -> F:
        @functools.wraps(func)
        def wrapper(*args, **kwargs):
            try:
                return func(*args, **kwargs)
            except SparseBVARError as exc:
                if exc.operation is None:
                    exc.operation = name
                raise

        return wrapper  # type: ignore[return-value]

    return decorator


# var_core
class TooFewObservations(SparseBVARError):
    pass


class NumericalFailure(SparseBVARError):
    pass


class IndexOutOfRange(SparseBVARError, IndexError):
    pass


class NotPositiveDefinite(NumericalFailure):
    pass


# minnesota_prior / conjugate_posterior
class SingularDesign(NumericalFailure):
    pass


class SingularPrior(NumericalFailure):
    pass


class SingularGram(NumericalFailure):
    pass


class DofTooSmall(SparseBVARError):
    pass


# dgp_simulator
class StabilityExhausted(SparseBVARError):
    pass


class ShapeMismatch(SparseBVARError, ValueError):
    pass


# forecasting
class RankDeficient(NumericalFailure):
    pass


# evaluation
class EmptyInput(SparseBVARError, ValueError):
    pass


class DivisionByZero(SparseBVARError, ZeroDivisionError):
    pass


class TooShort(SparseBVARError, ValueError):
    pass


class TooFewModels(SparseBVARError, ValueError):
    pass


class DegeneratePredictive(SparseBVARError):
    pass


# data_pipeline
class MissingColumn(SparseBVARError, KeyError):
    def __init__(self, column: str, operation: Optional[str] = None):
        super().__init__(f"missing column {column!r}", operation)
        self.column = column

    def __str__(self) -> str:
        return SparseBVARError.__str__(self)


class UnparseableCell(SparseBVARError, ValueError):
    def __init__(self, row: int, column: str, value: Any, operation: Optional[str] = None):
        super().__init__(f"cannot parse {value!r} at row {row}, column {column!r}", operation)
        self.row = row
        self.column = column


class NonPositiveForLog(SparseBVARError, ValueError):
    pass


class ZeroVariance(SparseBVARError, ValueError):
    pass


class FlagInconsistency(SparseBVARError, ValueError):
    pass


class MissingValues(SparseBVARError, ValueError):
    pass


# cli
class ConfigError(SparseBVARError, ValueError):
    pass


class TaskFailures(SparseBVARError):
    """Several indexed tasks failed; `failures` holds (index, exception) pairs"""

    def __init__(self, label: str, failures: List[Tuple[Any, BaseException]], operation: Optional[str] = None):
        indices = ", ".join(str(index) for index, _ in failures[:10])
        more = "" if len(failures) <= 10 else f" (+{len(failures) - 10} more)"
        first = failures[0][1] if failures else None
        super().__init__(
            f"{len(failures)} {label} task(s) failed at [{indices}]{more}; first error: {first}",
            operation,
        )
        self.label = label
        self.failures = failures
