"""Exception hierarchy shared across the pipeline."""

from __future__ import annotations


class DdbforgeError(Exception):
    """Base class for all errors raised by this package."""


class DdlSyntaxError(DdbforgeError):
    """Raised when DDL input does not match the accepted grammar.

    Carries the 1-based line/column of the offending token and, when known,
    what the parser expected there.
    """

    def __init__(self, message: str, line: int, column: int, expected: str | None = None):
        self.line = line
        self.column = column
        self.expected = expected
        detail = f"line {line}, column {column}: {message}"
        if expected:
            detail += f" (expected {expected})"
        super().__init__(detail)


class SchemaError(DdbforgeError):
    """Invalid schema construction (duplicate names, bad key declarations)."""


class TopologyError(DdbforgeError):
    """Invalid topology document or site definition."""


class PolicyError(DdbforgeError):
    """Distribution policy that cannot be resolved against schema/topology."""


class PlanError(DdbforgeError):
    """Fragmentation planning failure (bad target table, id collision)."""


class AmbiguousDerivationError(PlanError):
    """A table has foreign keys into several fragmented parents and the
    policy names no derivation preference; refusing to guess."""

    def __init__(self, table: str, parents: list[str]):
        self.table = table
        self.parents = parents
        super().__init__(
            f"table {table} has foreign keys into multiple fragmented parents "
            f"({', '.join(parents)}); set derive_from in its policy entry to pick one"
        )


class DatasetError(DdbforgeError):
    """Sample data that does not conform to the schema."""


class CodegenError(DdbforgeError):
    """Script generation failure (invalid plan, unknown site, collisions)."""
