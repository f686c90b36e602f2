import pytest

from ddbforge.ddl import parse_ddl
from ddbforge.errors import DdlSyntaxError
from ddbforge.schema import render_ddl

# DDL as printed in the source material for the per-campus student fragment.
STUDENT_FST_DDL = """
CREATE TABLE STUDENT_FST ( NCE NUMBER, ST_FNAME VARCHAR2(200),
ST_FLNAME VARCHAR2(200), ADRESS VARCHAR2(200 CHAR),
CLASS NUMBER, CURSUS VARCHAR2(200 CHAR), Constraint PK11 primary key (NCE) );
"""


def test_student_fst_ddl():
    schema = parse_ddl(STUDENT_FST_DDL)
    table = schema.table("STUDENT_FST")
    assert len(table.columns) == 6
    assert table.primary_key == ("NCE",)
    assert table.column("ADRESS").ctype.sql() == "VARCHAR2(200 CHAR)"
    assert table.column("NCE").nullable is False  # key columns never nullable


def test_empty_input_is_empty_schema():
    assert parse_ddl("").tables == ()
    assert parse_ddl("-- just a comment\n").tables == ()


def test_duplicate_table_rejected():
    text = "CREATE TABLE X (A NUMBER);\nCREATE TABLE X (B NUMBER);"
    with pytest.raises(DdlSyntaxError, match="duplicate table X"):
        parse_ddl(text)


def test_duplicate_column_rejected():
    with pytest.raises(DdlSyntaxError, match="duplicate column A"):
        parse_ddl("CREATE TABLE X (A NUMBER, A DATE);")


def test_unknown_type_has_position():
    with pytest.raises(DdlSyntaxError) as exc:
        parse_ddl("CREATE TABLE X (A BLOB);")
    assert exc.value.line == 1
    assert exc.value.column == 19
    assert "BLOB" in str(exc.value)


def test_syntax_error_reports_expected_token():
    with pytest.raises(DdlSyntaxError) as exc:
        parse_ddl("CREATE TABLE X A NUMBER);")
    assert exc.value.expected == "'('"
    assert exc.value.line == 1


def test_unsupported_statement():
    with pytest.raises(DdlSyntaxError, match="unsupported statement"):
        parse_ddl("CREATE VIEW V AS SELECT 1;")
    with pytest.raises(DdlSyntaxError, match="unsupported statement"):
        parse_ddl("DROP TABLE X;")


def test_identifier_normalization():
    schema = parse_ddl('CREATE TABLE t1 (col1 NUMBER, "MiXeD" DATE);')
    table = schema.table("T1")
    assert table.column_names == ("COL1", "MiXeD")


def test_quoted_identifier_spelling_preserved():
    schema = parse_ddl('CREATE TABLE X ("Class" NUMBER PRIMARY KEY);')
    assert schema.table("X").primary_key == ("Class",)


def test_inline_primary_key():
    schema = parse_ddl("CREATE TABLE X (A NUMBER PRIMARY KEY, B DATE NOT NULL);")
    table = schema.table("X")
    assert table.primary_key == ("A",)
    assert table.column("B").nullable is False


def test_foreign_key_parsing():
    text = """
    CREATE TABLE P (ID NUMBER, CONSTRAINT PK_P PRIMARY KEY (ID));
    CREATE TABLE C (
      ID NUMBER,
      P_ID NUMBER,
      CONSTRAINT PK_C PRIMARY KEY (ID),
      CONSTRAINT FK_C_P FOREIGN KEY (P_ID) REFERENCES P (ID)
    );
    """
    schema = parse_ddl(text)
    fk = schema.table("C").foreign_keys[0]
    assert fk.columns == ("P_ID",)
    assert fk.ref_table == "P"
    assert fk.ref_columns == ("ID",)


def test_parse_is_deterministic(library_schema, fixture_paths):
    text = open(fixture_paths["schema"], encoding="utf-8").read()
    assert parse_ddl(text) == parse_ddl(text) == library_schema


def test_render_parse_round_trip(library_schema):
    rendered = render_ddl(library_schema)
    assert parse_ddl(rendered) == library_schema
