"""
fsk Errors
==========
Exception hierarchy shared by the library and the command line.
"""

from typing import Optional


class FskError(Exception):
    """Base class for every error raised by fsk."""

    exit_code = 1


class ConfigError(FskError):
    """Invalid user configuration (dimension, cutoff, tolerance, suite...)."""

    exit_code = 2


class TensorBudgetError(FskError):
    """A dense tensor would exceed the configured memory budget."""

    exit_code = 3

    def __init__(self, required_bytes: int, budget_bytes: int, what: Optional[str] = None):
        self.required_bytes = required_bytes
        self.budget_bytes = budget_bytes
        label = f" for {what}" if what else ""
        super().__init__(
            f"tensor budget exceeded{label}: need {required_bytes} bytes, "
            f"budget is {budget_bytes} bytes (set FSK_MAX_TENSOR_BYTES to raise it)"
        )


class InconsistencyError(FskError):
    """An internal mathematical consistency check failed."""


class ConvergenceError(FskError):
    """A numerical procedure did not converge under refinement."""
