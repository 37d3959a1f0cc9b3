"""Exception hierarchy shared across the package.

Exit-code mapping used by the CLI: InputError -> 1, ConfigError and
DomainError -> 2, NumericFault -> 3, InsufficientDataError -> 4.
"""


class CyberRiskError(Exception):
    """Base class for all package errors."""


class DomainError(CyberRiskError, ValueError):
    """A parameter is outside its mathematical domain."""


class ConfigError(CyberRiskError, ValueError):
    """Configuration file or simulation spec is invalid."""


class InputError(CyberRiskError):
    """An input file cannot be read or decoded."""


class FormatError(CyberRiskError, ValueError):
    """An input file decodes but violates its schema badly (>50% rejects)."""


class InsufficientDataError(CyberRiskError, ValueError):
    """Too few records to fit the requested estimator."""


class NumericFault(CyberRiskError, ArithmeticError):
    """A nonfinite value was produced during simulation.

    Carries the risk level and repetition index where it occurred so the
    run can be reproduced.
    """

    def __init__(self, message: str, level: str | None = None, repetition: int | None = None):
        super().__init__(message)
        self.level = level
        self.repetition = repetition


class UndefinedMarginError(DomainError):
    """Risk margin ratio requested against a zero expected loss."""
