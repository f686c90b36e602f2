"""Oracle dialect strings, kept in one place.

Every statement the generator can emit is assembled from the forms below,
so a future dialect port touches only this module. Materialized views use
lowercase refresh clauses and triggers call ``raise_application_error``
exactly as Oracle scripts conventionally write them.
"""

from __future__ import annotations

STATEMENT_SEPARATOR = "\n\n"
PLSQL_TERMINATOR = "/"

ERR_DUPLICATE_KEY = -20009
ERR_UNROUTABLE = -20010
ERR_FK_VIOLATION = -20011

KIND_LABELS = {
    "account_stub": "Account stub",
    "dblink": "DB Link",
    "table": "Table",
    "synonym": "Synonym",
    "mview": "materialized view",
    "trigger": "Trigger",
    "procedure": "Procedure",
    "comment": "Note",
}


def banner(kind: str, name: str) -> str:
    return f"-----\n-- DDL for {KIND_LABELS[kind]} {name}\n-----"


def account_stub(site_name: str, user: str, secret: str) -> str:
    return (
        f"-----\n"
        f"-- Account stub for site {site_name}\n"
        f"-----\n"
        f"-- Review and run as a DBA before the rest of this script.\n"
        f'-- CREATE USER {user} IDENTIFIED BY "{secret}";\n'
        f"-- GRANT CONNECT, RESOURCE, CREATE DATABASE LINK, CREATE SYNONYM,\n"
        f"--   CREATE MATERIALIZED VIEW, CREATE TRIGGER, CREATE PROCEDURE TO {user};"
    )


def database_link(link: str, user: str, secret: str, host: str, port: int, service: str) -> str:
    return (
        f"CREATE DATABASE LINK {link}\n"
        f'CONNECT TO "{user}" IDENTIFIED BY VALUES \'{secret}\'\n'
        f"USING '(DESCRIPTION= (ADDRESS= (PROTOCOL=TCP) (HOST={host}) (PORT={port}))\n"
        f"(CONNECT_DATA= (SERVICE_NAME={service})))';"
    )


def create_table(name: str, column_defs: list[str], pk_columns: list[str]) -> str:
    defs = [f"  {d}" for d in column_defs]
    if pk_columns:
        defs.append(f"  CONSTRAINT PK_{name} PRIMARY KEY ({', '.join(pk_columns)})")
    body = ",\n".join(defs)
    return f"CREATE TABLE {name} (\n{body}\n);"


def synonym(name: str, target: str, link: str) -> str:
    return f"CREATE SYNONYM {name} FOR {target}@{link};"


def materialized_view(name: str, refresh_mode: str, interval_days: int, query: str) -> str:
    return (
        f"create materialized view {name}\n"
        f"refresh {refresh_mode}\n"
        f"start with sysdate\n"
        f"next sysdate + {interval_days}\n"
        f"as\n"
        f"{query};"
    )


def union_query(selects: list[str]) -> str:
    return " UNION\n".join(f"({s})" for s in selects)


def plain_select(columns: list[str], source: str) -> str:
    return f"select {', '.join(columns)} from {source}"


def raise_error(code: int, message: str) -> str:
    escaped = message.replace("'", "''")
    return f"raise_application_error({code}, '{escaped}');"


def trigger_header(name: str, table: str, declarations: list[str]) -> str:
    decl_block = ""
    if declarations:
        decl_block = "DECLARE\n" + "\n".join(f"  {d} NUMBER;" for d in declarations) + "\n"
    return (
        f"CREATE OR REPLACE TRIGGER {name}\n"
        f"BEFORE INSERT ON {table}\n"
        f"FOR EACH ROW\n"
        f"{decl_block}"
        f"BEGIN"
    )


def trigger_footer() -> str:
    return f"END;\n{PLSQL_TERMINATOR}"


def procedure(name: str, params: list[str], body_lines: list[str]) -> str:
    param_block = ""
    if params:
        inner = ",\n".join(f"  {p}" for p in params)
        param_block = f" (\n{inner}\n)"
    body = "\n".join(f"  {line}" for line in body_lines)
    return (
        f"CREATE OR REPLACE PROCEDURE {name}{param_block} AS\n"
        f"BEGIN\n"
        f"{body}\n"
        f"END;\n{PLSQL_TERMINATOR}"
    )
