"""Scalar values flowing through policies, predicates and sample data.

A value is one of: exact number (int or Decimal), text (str), day-precision
date (datetime.date) or null (None). Comparisons in predicate evaluation are
type-strict and null matches nothing; structural equality (used by multiset
comparisons) is plain Python equality, where int and Decimal of equal
magnitude compare equal by design.
"""

from __future__ import annotations

import datetime as dt
from decimal import Decimal, InvalidOperation

from .errors import DatasetError
from .schema import DATE, NUMBER, VARCHAR, ColumnType

Value = "int | Decimal | str | dt.date | None"


def coerce(ctype: ColumnType, raw, where: str = "value"):
    """Coerce a JSON-level scalar to the typed value a column expects."""
    if raw is None:
        return None
    if ctype.kind == NUMBER:
        if isinstance(raw, bool):
            raise DatasetError(f"{where}: expected a number, got a boolean")
        if isinstance(raw, (int, Decimal)):
            return raw
        if isinstance(raw, float):
            return Decimal(str(raw))
        if isinstance(raw, str):
            try:
                dec = Decimal(raw)
            except InvalidOperation:
                raise DatasetError(f"{where}: {raw!r} is not a number") from None
            return int(dec) if dec == dec.to_integral_value() else dec
        raise DatasetError(f"{where}: expected a number, got {type(raw).__name__}")
    if ctype.kind == VARCHAR:
        if not isinstance(raw, str):
            raise DatasetError(f"{where}: expected text, got {type(raw).__name__}")
        return raw
    if ctype.kind == DATE:
        if isinstance(raw, dt.date):
            return raw
        if isinstance(raw, str):
            try:
                return dt.date.fromisoformat(raw)
            except ValueError:
                raise DatasetError(f"{where}: {raw!r} is not an ISO date (YYYY-MM-DD)") from None
        raise DatasetError(f"{where}: expected an ISO date string, got {type(raw).__name__}")
    raise DatasetError(f"{where}: unsupported column type {ctype.kind}")


def matches(candidate, expected) -> bool:
    """Type-strict equality used by predicate evaluation; null matches nothing."""
    if candidate is None or expected is None:
        return False
    if isinstance(candidate, (int, Decimal)) and isinstance(expected, (int, Decimal)):
        return candidate == expected
    if type(candidate) is not type(expected):
        return False
    return candidate == expected


def to_json(value):
    """Render a value into its JSON document form."""
    if value is None or isinstance(value, (int, str)):
        return value
    if isinstance(value, Decimal):
        return int(value) if value == value.to_integral_value() else float(value)
    if isinstance(value, dt.date):
        return value.isoformat()
    raise TypeError(f"not a scalar value: {value!r}")


def sql_literal(value) -> str:
    """Render a value as an Oracle SQL literal."""
    if value is None:
        return "NULL"
    if isinstance(value, (int, Decimal)):
        return str(value)
    if isinstance(value, dt.date):
        return f"DATE '{value.isoformat()}'"
    escaped = str(value).replace("'", "''")
    return f"'{escaped}'"
