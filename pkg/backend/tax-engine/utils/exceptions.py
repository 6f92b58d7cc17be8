"""
Error hierarchy for the ASSETAX tax engine

Each error class carries the process exit code the CLI reports for it.
"""

from dataclasses import dataclass
from typing import List, Optional

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERICAL = 3


class AssetaxError(Exception):
    exit_code = EXIT_DATA


class DomainError(AssetaxError, ValueError):
    """Input outside the domain of a formula."""


class TailTruncationError(DomainError):
    """Evaluation beyond the truncated upper tail of a distribution."""


class RegimeError(AssetaxError, ArithmeticError):
    """Schedule formula denominator is not positive."""
    exit_code = EXIT_NUMERICAL


class ScheduleEvaluationError(AssetaxError):
    """A marginal evaluation failed while integrating a schedule."""
    exit_code = EXIT_NUMERICAL

    def __init__(self, point: float, cause: Exception):
        super().__init__(f"schedule evaluation failed at x={point!r}: {cause}")
        self.point = point
        self.cause = cause


class GridBoundaryError(AssetaxError):
    """Brute-force argmax landed on the edge of its grid; widen the grid."""
    exit_code = EXIT_NUMERICAL


class ConfigurationError(AssetaxError):
    """Policy inputs are incomplete for the requested treatment."""


class UsageError(AssetaxError):
    exit_code = EXIT_USAGE


@dataclass(frozen=True)
class ScenarioIssue:
    locus: str
    message: str
    line: Optional[int] = None

    def __str__(self) -> str:
        where = f"{self.locus} (line {self.line})" if self.line is not None else self.locus
        return f"{where}: {self.message}"


class ScenarioError(AssetaxError):
    """Scenario file failed validation; carries every issue found."""

    def __init__(self, issues: List[ScenarioIssue]):
        self.issues = list(issues)
        lines = "\n".join(f"  - {issue}" for issue in self.issues)
        super().__init__(f"{len(self.issues)} scenario error(s):\n{lines}")
