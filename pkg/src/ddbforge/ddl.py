"""Parser for the accepted DDL subset.

Grammar (terminals case-insensitive, ``--`` comments ignored)::

    script     := stmt*
    stmt       := CREATE TABLE ident "(" coldef ("," coldef)* ("," constraint)* ")" ";"
    coldef     := ident type [PRIMARY KEY] [NOT NULL]
    type       := NUMBER | DATE | VARCHAR2 "(" integer [CHAR] ")"
    constraint := CONSTRAINT ident ( PRIMARY KEY "(" identlist ")"
                                   | FOREIGN KEY "(" identlist ")" REFERENCES ident "(" identlist ")" )

Unquoted identifiers are uppercased (Oracle convention); double-quoted ones
keep their exact spelling. Anything outside this subset is rejected with an
"unsupported statement" error rather than passed through.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import DdlSyntaxError
from .schema import DATE, NUMBER, VARCHAR, Column, ColumnType, ForeignKey, Schema, Table

_IDENT_START = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_")
_IDENT_BODY = _IDENT_START | set("0123456789$#")
_PUNCT = set("(),;")

_TYPE_KEYWORDS = {"NUMBER", "VARCHAR2", "DATE"}
# Type spellings we recognize but deliberately reject, so the error names the
# offending keyword instead of reporting a generic syntax failure.
_KNOWN_OTHER_TYPES = {
    "VARCHAR", "CHAR", "NCHAR", "NVARCHAR2", "CLOB", "BLOB", "INTEGER", "INT",
    "FLOAT", "TIMESTAMP", "RAW", "LONG", "DECIMAL", "NUMERIC", "BOOLEAN",
}


@dataclass(frozen=True)
class _Token:
    kind: str  # "ident" | "qident" | "number" | "punct" | "eof"
    text: str
    line: int
    column: int

    @property
    def upper(self) -> str:
        return self.text.upper()


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            i, line, col = i + 1, line + 1, 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if text.startswith("--", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        start_line, start_col = line, col
        if ch == '"':
            j = text.find('"', i + 1)
            if j < 0:
                raise DdlSyntaxError("unterminated quoted identifier", start_line, start_col)
            tokens.append(_Token("qident", text[i + 1 : j], start_line, start_col))
            col += j + 1 - i
            i = j + 1
            continue
        if ch in _IDENT_START:
            j = i + 1
            while j < n and text[j] in _IDENT_BODY:
                j += 1
            tokens.append(_Token("ident", text[i:j], start_line, start_col))
            col += j - i
            i = j
            continue
        if ch.isdigit():
            j = i + 1
            while j < n and text[j].isdigit():
                j += 1
            tokens.append(_Token("number", text[i:j], start_line, start_col))
            col += j - i
            i = j
            continue
        if ch in _PUNCT:
            tokens.append(_Token("punct", ch, start_line, start_col))
            i += 1
            col += 1
            continue
        raise DdlSyntaxError(f"unexpected character {ch!r}", start_line, start_col)
    last_line = line
    tokens.append(_Token("eof", "", last_line, col))
    return tokens


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def error(self, message: str, expected: str | None = None) -> DdlSyntaxError:
        tok = self.peek()
        return DdlSyntaxError(message, tok.line, tok.column, expected)

    def at_keyword(self, word: str) -> bool:
        tok = self.peek()
        return tok.kind == "ident" and tok.upper == word

    def expect_keyword(self, word: str) -> _Token:
        if not self.at_keyword(word):
            raise self.error(f"got {self.peek().text!r}", expected=word)
        return self.advance()

    def expect_punct(self, ch: str) -> _Token:
        tok = self.peek()
        if tok.kind != "punct" or tok.text != ch:
            raise self.error(f"got {tok.text!r}", expected=repr(ch))
        return self.advance()

    def expect_ident(self, what: str = "identifier") -> str:
        tok = self.peek()
        if tok.kind == "ident":
            self.advance()
            return tok.upper
        if tok.kind == "qident":
            self.advance()
            if not tok.text:
                raise DdlSyntaxError("empty quoted identifier", tok.line, tok.column)
            return tok.text
        raise self.error(f"got {tok.text!r}", expected=what)

    def parse_script(self) -> Schema:
        tables: list[Table] = []
        names: set[str] = set()
        while self.peek().kind != "eof":
            table = self.parse_create_table()
            if table.name in names:
                raise DdlSyntaxError(
                    f"duplicate table {table.name}",
                    self.peek().line,
                    self.peek().column,
                )
            names.add(table.name)
            tables.append(table)
        return Schema(tables=tuple(tables))

    def parse_create_table(self) -> Table:
        tok = self.peek()
        if not self.at_keyword("CREATE"):
            raise self.error(f"unsupported statement starting with {tok.text!r}", expected="CREATE")
        self.advance()
        if not self.at_keyword("TABLE"):
            raise self.error(
                f"unsupported statement: CREATE {self.peek().text.upper()}", expected="TABLE"
            )
        self.advance()
        name = self.expect_ident("table name")
        self.expect_punct("(")

        columns: list[Column] = []
        inline_pk: list[str] = []
        primary_key: tuple[str, ...] | None = None
        foreign_keys: list[ForeignKey] = []
        seen_cols: set[str] = set()

        while True:
            if self.at_keyword("CONSTRAINT"):
                kind, payload = self.parse_constraint()
                if kind == "pk":
                    if primary_key is not None:
                        raise self.error(f"table {name} declares more than one primary key")
                    primary_key = payload  # type: ignore[assignment]
                else:
                    foreign_keys.append(payload)  # type: ignore[arg-type]
            else:
                col, is_pk = self.parse_coldef(name, seen_cols)
                columns.append(col)
                seen_cols.add(col.name)
                if is_pk:
                    inline_pk.append(col.name)
            tok = self.peek()
            if tok.kind == "punct" and tok.text == ",":
                self.advance()
                continue
            break
        self.expect_punct(")")
        self.expect_punct(";")

        if primary_key is not None and inline_pk:
            raise DdlSyntaxError(
                f"table {name} mixes inline and named primary keys",
                self.peek().line,
                self.peek().column,
            )
        pk = primary_key if primary_key is not None else tuple(inline_pk)
        return Table(name=name, columns=tuple(columns), primary_key=pk, foreign_keys=tuple(foreign_keys))

    def parse_coldef(self, table: str, seen: set[str]) -> tuple[Column, bool]:
        tok = self.peek()
        col_name = self.expect_ident("column name")
        if col_name in seen:
            raise DdlSyntaxError(f"duplicate column {col_name} in table {table}", tok.line, tok.column)
        ctype = self.parse_type()
        is_pk = False
        nullable = True
        while True:
            if self.at_keyword("PRIMARY"):
                self.advance()
                self.expect_keyword("KEY")
                is_pk = True
            elif self.at_keyword("NOT"):
                self.advance()
                self.expect_keyword("NULL")
                nullable = False
            else:
                break
        return Column(name=col_name, ctype=ctype, nullable=nullable), is_pk

    def parse_type(self) -> ColumnType:
        tok = self.peek()
        if tok.kind != "ident":
            raise self.error(f"got {tok.text!r}", expected="column type")
        word = tok.upper
        if word not in _TYPE_KEYWORDS:
            if word in _KNOWN_OTHER_TYPES:
                raise DdlSyntaxError(
                    f"unsupported column type {word} (accepted: NUMBER, VARCHAR2(n [CHAR]), DATE)",
                    tok.line,
                    tok.column,
                )
            raise DdlSyntaxError(f"unknown column type {word}", tok.line, tok.column)
        self.advance()
        if word == "NUMBER":
            return ColumnType(NUMBER)
        if word == "DATE":
            return ColumnType(DATE)
        self.expect_punct("(")
        len_tok = self.peek()
        if len_tok.kind != "number":
            raise self.error(f"got {len_tok.text!r}", expected="length")
        self.advance()
        length = int(len_tok.text)
        if length < 1:
            raise DdlSyntaxError("varchar length must be >= 1", len_tok.line, len_tok.column)
        char_semantics = False
        if self.at_keyword("CHAR"):
            self.advance()
            char_semantics = True
        self.expect_punct(")")
        return ColumnType(VARCHAR, length=length, char_semantics=char_semantics)

    def parse_constraint(self) -> tuple[str, tuple[str, ...] | ForeignKey]:
        self.expect_keyword("CONSTRAINT")
        cname = self.expect_ident("constraint name")
        if self.at_keyword("PRIMARY"):
            self.advance()
            self.expect_keyword("KEY")
            return "pk", self.parse_identlist()
        if self.at_keyword("FOREIGN"):
            self.advance()
            self.expect_keyword("KEY")
            columns = self.parse_identlist()
            self.expect_keyword("REFERENCES")
            ref_table = self.expect_ident("referenced table")
            ref_columns = self.parse_identlist()
            return "fk", ForeignKey(
                name=cname, columns=columns, ref_table=ref_table, ref_columns=ref_columns
            )
        raise self.error(f"got {self.peek().text!r}", expected="PRIMARY KEY or FOREIGN KEY")

    def parse_identlist(self) -> tuple[str, ...]:
        self.expect_punct("(")
        idents = [self.expect_ident()]
        while True:
            tok = self.peek()
            if tok.kind == "punct" and tok.text == ",":
                self.advance()
                idents.append(self.expect_ident())
            else:
                break
        self.expect_punct(")")
        return tuple(idents)


def parse_ddl(text: str) -> Schema:
    """Parse a sequence of CREATE TABLE statements into a :class:`Schema`.

    Deterministic: identical input bytes yield a structurally identical
    schema. Declaration order is preserved.
    """
    return _Parser(_tokenize(text)).parse_script()
