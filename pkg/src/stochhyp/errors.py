"""Shared exception types."""

from __future__ import annotations

__all__ = ["ConfigurationError", "DivergenceError"]


class ConfigurationError(ValueError):
    """Invalid experiment configuration; carries every violation found."""

    def __init__(self, violations: list[str] | str):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class DivergenceError(RuntimeError):
    """Non-finite value produced during time marching."""

    def __init__(self, message: str, step: int, where: str):
        self.step = step
        self.where = where
        super().__init__(f"{message} at step {step} ({where})")
