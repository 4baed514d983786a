"""
Иерархия исключений phaseseg.

Все ошибки библиотеки наследуются от PhaseSegError, поэтому CLI может
отличить их от ошибок жизненного цикла компонентов.
"""

import typing as t


class PhaseSegError(Exception):
    """Базовое исключение библиотеки."""


class DomainError(PhaseSegError, ValueError):
    """Input lies outside the mathematical domain of an operation."""


class PreconditionError(PhaseSegError, ValueError):
    """A stated precondition of an operation does not hold."""


class QuadratureError(PhaseSegError, ArithmeticError):
    """Quadrature produced a value that is impossible for exact integrals."""


class SolverError(PhaseSegError, RuntimeError):
    """Итерационный решатель разошелся или не сошелся за бюджет итераций."""

    def __init__(self, message: str, trace: t.Optional[t.Sequence[float]] = None):
        super().__init__(message)
        self.trace: t.List[float] = list(trace or [])


class ConfigError(PhaseSegError, ValueError):
    """Usage error; `key` names the offending parameter when there is one."""

    def __init__(self, message: str, key: t.Optional[str] = None):
        super().__init__(message)
        self.key = key
