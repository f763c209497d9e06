"""Shared exception types: regime violations vs numerical failures.

``RegimeError`` marks a violated validity hypothesis (a config-level error,
message citing the failing inequality); ``NumericalFailure`` marks a runtime
numerical breakdown (non-convergence, degenerate sample) and can carry the
indices of the offending samples.
"""

from __future__ import annotations

__all__ = ["RegimeError", "NumericalFailure"]


class RegimeError(ValueError):
    """A validity-regime inequality does not hold for the requested parameters."""


class NumericalFailure(RuntimeError):
    """A numerical procedure failed to converge or hit a degenerate sample."""

    def __init__(self, message: str, indices=None):
        super().__init__(message)
        self.indices = [int(i) for i in indices] if indices is not None else []
