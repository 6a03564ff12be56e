"""Exception types shared across the package.

Every error carries a machine-readable ``kind`` tag and a ``details`` dict so
the CLI can serialize failures as JSON without string parsing.
"""

from __future__ import annotations


class SaacertError(Exception):
    """Base class for all package errors."""

    kind = "error"

    def __init__(self, message: str, **details):
        super().__init__(message)
        self.message = message
        self.details = details

    def to_json(self) -> dict:
        return {"error": self.kind, "message": self.message, "details": self.details}


class EmptySampleError(SaacertError):
    kind = "empty-sample"


class DimensionMismatchError(SaacertError):
    kind = "dimension-mismatch"


class BudgetError(SaacertError):
    kind = "budget-exceeded"


class SlaterMarginError(SaacertError):
    kind = "slater-margin"


class InfeasibleError(SaacertError):
    kind = "infeasible"


class DegenerateFeatureError(SaacertError):
    kind = "degenerate-feature"


class ConfigError(SaacertError):
    kind = "config"


class UncalibratableError(SaacertError):
    kind = "uncalibratable"
