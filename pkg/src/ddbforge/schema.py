"""Relational schema model for the centralized database.

Tables are immutable after construction and validate their local invariants
eagerly: invalid tables cannot be built through this surface. Cross-table
checks (foreign-key resolution) live in :func:`check_schema`, which reports
diagnostics instead of raising so a schema with dangling references can
still be inspected.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .diagnostics import ERROR, WARNING, Diagnostic
from .errors import SchemaError

NUMBER = "number"
VARCHAR = "varchar"
DATE = "date"


@dataclass(frozen=True)
class ColumnType:
    """One of NUMBER, VARCHAR2(n [CHAR]) or DATE."""

    kind: str
    length: int | None = None
    char_semantics: bool = False

    def __post_init__(self) -> None:
        if self.kind not in (NUMBER, VARCHAR, DATE):
            raise SchemaError(f"unknown column type kind: {self.kind!r}")
        if self.kind == VARCHAR:
            if self.length is None or self.length < 1:
                raise SchemaError("varchar length must be >= 1")
        elif self.length is not None or self.char_semantics:
            raise SchemaError(f"{self.kind} carries no parameters")

    def sql(self) -> str:
        """Render the Oracle type text, e.g. ``VARCHAR2(200 CHAR)``."""
        if self.kind == NUMBER:
            return "NUMBER"
        if self.kind == DATE:
            return "DATE"
        unit = " CHAR" if self.char_semantics else ""
        return f"VARCHAR2({self.length}{unit})"


@dataclass(frozen=True)
class Column:
    name: str
    ctype: ColumnType
    nullable: bool = True

    def __post_init__(self) -> None:
        if not self.name:
            raise SchemaError("column name must be non-empty")


@dataclass(frozen=True)
class ForeignKey:
    name: str
    columns: tuple[str, ...]
    ref_table: str
    ref_columns: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(self.columns) < 1:
            raise SchemaError(f"foreign key {self.name}: needs at least one column")
        if len(self.columns) != len(self.ref_columns):
            raise SchemaError(
                f"foreign key {self.name}: column count {len(self.columns)} does not "
                f"match referenced column count {len(self.ref_columns)}"
            )


@dataclass(frozen=True)
class Table:
    name: str
    columns: tuple[Column, ...]
    primary_key: tuple[str, ...]
    foreign_keys: tuple[ForeignKey, ...] = ()

    def __post_init__(self) -> None:
        if not self.name:
            raise SchemaError("table name must be non-empty")
        seen: set[str] = set()
        for col in self.columns:
            if col.name in seen:
                raise SchemaError(f"table {self.name}: duplicate column {col.name}")
            seen.add(col.name)
        for pk_col in self.primary_key:
            if pk_col not in seen:
                raise SchemaError(f"table {self.name}: primary key column {pk_col} not found")
        for fk in self.foreign_keys:
            for col in fk.columns:
                if col not in seen:
                    raise SchemaError(
                        f"table {self.name}: foreign key {fk.name} uses unknown column {col}"
                    )
        # PK columns are implicitly non-nullable; normalize so downstream
        # consumers never see a nullable key column.
        if self.primary_key:
            fixed = tuple(
                Column(c.name, c.ctype, nullable=False) if c.name in self.primary_key else c
                for c in self.columns
            )
            object.__setattr__(self, "columns", fixed)

    @property
    def column_names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.columns)

    def column(self, name: str) -> Column:
        for c in self.columns:
            if c.name == name:
                return c
        raise KeyError(f"{self.name} has no column {name}")

    def has_column(self, name: str) -> bool:
        return any(c.name == name for c in self.columns)


@dataclass(frozen=True)
class Schema:
    """Ordered collection of tables; order is declaration order."""

    tables: tuple[Table, ...] = ()
    _by_name: dict[str, Table] = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self) -> None:
        by_name: dict[str, Table] = {}
        for table in self.tables:
            if table.name in by_name:
                raise SchemaError(f"duplicate table {table.name}")
            by_name[table.name] = table
        object.__setattr__(self, "_by_name", by_name)

    def __contains__(self, name: str) -> bool:
        return name in self._by_name

    def table(self, name: str) -> Table:
        try:
            return self._by_name[name]
        except KeyError:
            raise KeyError(f"schema has no table {name}") from None

    @property
    def table_names(self) -> tuple[str, ...]:
        return tuple(t.name for t in self.tables)


def check_schema(schema: Schema) -> list[Diagnostic]:
    """Cross-table consistency checks.

    Emits, in table order: an error per unresolved foreign-key target, an
    error per key mismatch (referenced columns are not the target's primary
    key), and a warning per table without a primary key, since such tables
    cannot be fragmented.
    """
    out: list[Diagnostic] = []
    for table in schema.tables:
        for fk in table.foreign_keys:
            if fk.ref_table not in schema:
                out.append(
                    Diagnostic(
                        ERROR,
                        "fk-unresolved",
                        f"{table.name}.{fk.name}: referenced table {fk.ref_table} does not exist",
                    )
                )
                continue
            target = schema.table(fk.ref_table)
            if tuple(fk.ref_columns) != tuple(target.primary_key):
                out.append(
                    Diagnostic(
                        ERROR,
                        "fk-key-mismatch",
                        f"{table.name}.{fk.name}: referenced columns "
                        f"({', '.join(fk.ref_columns)}) are not the primary key of "
                        f"{fk.ref_table} ({', '.join(target.primary_key) or 'none'})",
                    )
                )
    for table in schema.tables:
        if not table.primary_key:
            out.append(
                Diagnostic(
                    WARNING,
                    "no-primary-key",
                    f"table {table.name} has no primary key and cannot be fragmented",
                )
            )
    return out


def _quote_ident(name: str) -> str:
    # Identifiers that survive round-trips unquoted are ASCII upper snake;
    # anything else must be double-quoted to preserve its exact spelling.
    if name and name == name.upper() and name[0].isalpha() and all(
        ch.isalnum() or ch in "_$#" for ch in name
    ):
        return name
    return f'"{name}"'


def render_ddl(schema: Schema) -> str:
    """Render canonical DDL such that ``parse_ddl(render_ddl(s)) == s``."""
    stmts: list[str] = []
    for table in schema.tables:
        lines = [f"CREATE TABLE {_quote_ident(table.name)} ("]
        defs: list[str] = []
        for col in table.columns:
            text = f"  {_quote_ident(col.name)} {col.ctype.sql()}"
            if not col.nullable and col.name not in table.primary_key:
                text += " NOT NULL"
            defs.append(text)
        if table.primary_key:
            cols = ", ".join(_quote_ident(c) for c in table.primary_key)
            defs.append(f"  CONSTRAINT PK_{table.name} PRIMARY KEY ({cols})")
        for fk in table.foreign_keys:
            cols = ", ".join(_quote_ident(c) for c in fk.columns)
            refs = ", ".join(_quote_ident(c) for c in fk.ref_columns)
            defs.append(
                f"  CONSTRAINT {_quote_ident(fk.name)} FOREIGN KEY ({cols}) "
                f"REFERENCES {_quote_ident(fk.ref_table)} ({refs})"
            )
        lines.append(",\n".join(defs))
        lines.append(");")
        stmts.append("\n".join(lines))
    return "\n\n".join(stmts) + ("\n" if stmts else "")


def column_type_to_json(ctype: ColumnType) -> dict:
    doc: dict = {"kind": ctype.kind}
    if ctype.kind == VARCHAR:
        doc["length"] = ctype.length
        doc["char_semantics"] = ctype.char_semantics
    return doc


def column_type_from_json(doc: dict) -> ColumnType:
    return ColumnType(
        kind=doc["kind"],
        length=doc.get("length"),
        char_semantics=doc.get("char_semantics", False),
    )


def schema_to_json(schema: Schema) -> dict:
    return {
        "tables": [
            {
                "name": t.name,
                "columns": [
                    {
                        "name": c.name,
                        "type": column_type_to_json(c.ctype),
                        "nullable": c.nullable,
                    }
                    for c in t.columns
                ],
                "primary_key": list(t.primary_key),
                "foreign_keys": [
                    {
                        "name": fk.name,
                        "columns": list(fk.columns),
                        "ref_table": fk.ref_table,
                        "ref_columns": list(fk.ref_columns),
                    }
                    for fk in t.foreign_keys
                ],
            }
            for t in schema.tables
        ]
    }


def schema_from_json(doc: dict) -> Schema:
    tables = []
    for tdoc in doc["tables"]:
        tables.append(
            Table(
                name=tdoc["name"],
                columns=tuple(
                    Column(
                        name=cdoc["name"],
                        ctype=column_type_from_json(cdoc["type"]),
                        nullable=cdoc.get("nullable", True),
                    )
                    for cdoc in tdoc["columns"]
                ),
                primary_key=tuple(tdoc.get("primary_key", ())),
                foreign_keys=tuple(
                    ForeignKey(
                        name=fdoc["name"],
                        columns=tuple(fdoc["columns"]),
                        ref_table=fdoc["ref_table"],
                        ref_columns=tuple(fdoc["ref_columns"]),
                    )
                    for fdoc in tdoc.get("foreign_keys", ())
                ),
            )
        )
    return Schema(tables=tuple(tables))
