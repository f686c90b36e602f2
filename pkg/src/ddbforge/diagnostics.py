"""Diagnostics returned by the check_* entry points.

A diagnostic is a finding, not an exception: callers decide whether errors
abort the pipeline (the CLI maps them to exit code 2 for input-level checks).
"""

from __future__ import annotations

from dataclasses import dataclass

ERROR = "error"
WARNING = "warning"


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "warning"
    code: str  # stable machine-readable identifier, e.g. "fk-unresolved"
    message: str

    def __str__(self) -> str:
        return f"{self.severity}[{self.code}]: {self.message}"


def has_errors(diagnostics: list[Diagnostic]) -> bool:
    return any(d.severity == ERROR for d in diagnostics)
