"""Exception taxonomy shared across the package.

The CLI maps these onto distinct exit codes, so library code should raise
the most specific class that applies.
"""


class SlipsenseError(Exception):
    """Base class for all package errors."""


class DomainError(SlipsenseError, ValueError):
    """An argument is outside the mathematical domain of an operation."""


class MacroSlipError(DomainError):
    """Tangential load at or beyond the full-sliding limit mu * F_N."""


class GridError(DomainError):
    """Deformation grids are malformed or mismatched."""


class SequencingError(SlipsenseError):
    """Samples or frames arrived out of order."""


class SolverError(SlipsenseError):
    """Quasi-static solve failed to converge; carries the last residual."""

    def __init__(self, message: str, residual: float | None = None):
        super().__init__(message)
        self.residual = residual


class SequenceFormatError(SlipsenseError):
    """A frame-sequence file is unreadable: bad version, size, or payload."""


class ScenarioError(SlipsenseError):
    """A scenario file is invalid or references unknown models/parameters."""


class DetectorConfigError(SlipsenseError):
    """Detector configuration violates its invariants."""


class DegenerateDesignError(SlipsenseError):
    """Regression design matrix is rank deficient.

    ``regressor`` names the offending column.
    """

    def __init__(self, message: str, regressor: str | None = None):
        super().__init__(message)
        self.regressor = regressor


class UnsupportedInputError(SlipsenseError):
    """The input lacks fields required by the requested operation."""
