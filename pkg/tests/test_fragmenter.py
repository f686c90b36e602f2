import pytest

from ddbforge.errors import AmbiguousDerivationError, PlanError
from ddbforge.fragmenter import (
    build_plan,
    derive_fragments,
    plan_from_json,
    plan_tables,
    plan_to_json,
)
from ddbforge.policy import parse_policy

BOOKS_BY_AREA = {
    "table": "BOOKS",
    "mode": "horizontal",
    "horizontal": {
        "column": "AREA",
        "assignments": {"ENIT": ["CS"], "FST": ["MATH"], "FSEGT": ["ECON"]},
        "domain": ["CS", "MATH", "ECON"],
    },
}


def _plan(schema, topology, entries):
    policy = parse_policy({"tables": entries}, schema, topology)
    return plan_tables(schema, topology, policy)


def test_student_hybrid_expansion(library_plan):
    student = [f.id for f in library_plan.fragments_of("STUDENT")]
    assert student == [
        "STUDENT_ENIT",
        "STUDENT_FST",
        "STUDENT_FSEGT",
        "STUDENT_LIB_ENIT",
        "STUDENT_LIB_FST",
        "STUDENT_LIB_FSEGT",
    ]
    lib = library_plan.fragment("STUDENT_LIB_FST")
    assert lib.primary_copy is False
    assert library_plan.fragment("STUDENT_LIB_ENIT").primary_copy is True
    main = library_plan.fragment("STUDENT_ENIT")
    assert main.predicate.values == ("ENIT",)
    assert "NB_BORROW" not in main.columns


def test_mode_none_yields_zero_fragments(library_schema, library_topology):
    plan = _plan(
        library_schema,
        library_topology,
        [{"table": "STUDENT", "mode": "none"}],
    )
    assert plan.fragments == ()


def test_horizontal_expansion_count(library_schema, library_topology):
    plan = _plan(
        library_schema,
        library_topology,
        [
            {
                "table": "EMPLOYEE",
                "mode": "horizontal",
                "horizontal": {
                    "column": "ASSIGNMENT",
                    "assignments": {"ENIT": ["ENIT"], "FST": ["FST"], "FSEGT": ["FSEGT"]},
                },
            }
        ],
    )
    employee = plan.fragments_of("EMPLOYEE")
    assert len(employee) == 3
    assert {f.site for f in employee} == {"ENIT", "FST", "FSEGT"}
    assert all(f.columns == library_schema.table("EMPLOYEE").column_names for f in employee)


def test_default_site_adds_catch_all(library_schema, library_topology):
    plan = _plan(
        library_schema,
        library_topology,
        [
            {
                "table": "EMPLOYEE",
                "mode": "horizontal",
                "horizontal": {
                    "column": "ASSIGNMENT",
                    "assignments": {"ENIT": ["ENIT"], "FST": ["FST"]},
                    "default_site": "FSEGT",
                },
            }
        ],
    )
    employee = plan.fragments_of("EMPLOYEE")
    assert len(employee) == 3  # two assignments plus one distinct catch-all
    catch = plan.fragment("EMPLOYEE_FSEGT")
    assert catch.predicate.kind == "catch_all"


def test_default_site_on_assigned_site_absorbs_values(library_schema, library_topology):
    plan = _plan(
        library_schema,
        library_topology,
        [
            {
                "table": "EMPLOYEE",
                "mode": "horizontal",
                "horizontal": {
                    "column": "ASSIGNMENT",
                    "assignments": {"ENIT": ["ENIT"], "FST": ["FST"]},
                    "default_site": "FST",
                },
            }
        ],
    )
    employee = plan.fragments_of("EMPLOYEE")
    assert len(employee) == 2  # default coincides with an assigned site
    assert plan.fragment("EMPLOYEE_FST").predicate.kind == "catch_all"


def test_derived_authors_follow_books(library_schema, library_topology):
    plan = _plan(library_schema, library_topology, [BOOKS_BY_AREA])
    authors = plan.fragments_of("AUTHORS")
    assert [f.id for f in authors] == ["AUTHORS_ENIT", "AUTHORS_FST", "AUTHORS_FSEGT"]
    assert all(f.kind == "derived" for f in authors)
    assert [f.parent_fragment for f in authors] == ["BOOKS_ENIT", "BOOKS_FST", "BOOKS_FSEGT"]
    assert plan.derived_edge("AUTHORS") == (("ID_BOOK",), "BOOKS")


def test_no_horizontal_fragments_means_no_derivation(library_schema, library_topology):
    policy = parse_policy(
        {
            "tables": [
                {
                    "table": "BOOKS",
                    "mode": "replicate_full",
                }
            ]
        },
        library_schema,
        library_topology,
    )
    plan = build_plan(library_schema, library_topology, policy)
    derived = derive_fragments(plan)
    assert derived.fragments == plan.fragments
    assert derived.derived_edges == ()


def test_ambiguous_derivation_is_reported(library_schema, library_topology, library_policy):
    entries = [BOOKS_BY_AREA] + [
        {
            "table": "STUDENT",
            "mode": "horizontal",
            "horizontal": {
                "column": "INSTITUTION",
                "assignments": {"ENIT": ["ENIT"], "FST": ["FST"], "FSEGT": ["FSEGT"]},
            },
        }
    ]
    with pytest.raises(AmbiguousDerivationError) as exc:
        _plan(library_schema, library_topology, entries)
    assert exc.value.table == "LOANS"
    assert set(exc.value.parents) == {"BOOKS", "STUDENT"}


def test_derive_from_preference_resolves_ambiguity(library_schema, library_topology):
    entries = [
        BOOKS_BY_AREA,
        {
            "table": "STUDENT",
            "mode": "horizontal",
            "horizontal": {
                "column": "INSTITUTION",
                "assignments": {"ENIT": ["ENIT"], "FST": ["FST"], "FSEGT": ["FSEGT"]},
            },
        },
        {"table": "LOANS", "mode": "none", "derive_from": "STUDENT"},
    ]
    plan = _plan(library_schema, library_topology, entries)
    assert plan.derived_edge("LOANS") == (("NCE",), "STUDENT")
    assert [f.parent_fragment for f in plan.fragments_of("LOANS")] == [
        "STUDENT_ENIT",
        "STUDENT_FST",
        "STUDENT_FSEGT",
    ]


def test_fragmenting_table_without_pk_fails(library_topology):
    from ddbforge.ddl import parse_ddl
    from ddbforge.policy import parse_policy as pp

    schema = parse_ddl("CREATE TABLE NOKEY (A NUMBER, B VARCHAR2(10));")
    policy = pp(
        {
            "tables": [
                {
                    "table": "NOKEY",
                    "mode": "horizontal",
                    "horizontal": {"column": "B", "assignments": {"ENIT": ["x"]}},
                }
            ]
        },
        schema,
        library_topology,
    )
    with pytest.raises(PlanError, match="no primary key"):
        build_plan(schema, library_topology, policy)


def test_fragment_id_collision_with_table_name(library_topology):
    from ddbforge.ddl import parse_ddl

    # A table literally named STUDENT_ENIT collides with the generated id.
    schema = parse_ddl(
        "CREATE TABLE STUDENT (NCE NUMBER, INSTITUTION VARCHAR2(20),"
        " CONSTRAINT PK_S PRIMARY KEY (NCE));"
        "CREATE TABLE STUDENT_ENIT (X NUMBER, CONSTRAINT PK_SE PRIMARY KEY (X));"
    )
    policy = parse_policy(
        {
            "tables": [
                {
                    "table": "STUDENT",
                    "mode": "horizontal",
                    "horizontal": {"column": "INSTITUTION", "assignments": {"ENIT": ["ENIT"]}},
                }
            ]
        },
        schema,
        library_topology,
    )
    with pytest.raises(PlanError, match="collides with an existing table"):
        build_plan(schema, library_topology, policy)


def test_every_fragment_contains_full_pk(library_plan):
    for frag in library_plan.fragments:
        pk = library_plan.schema.table(frag.table).primary_key
        assert set(pk) <= set(frag.columns)


def test_plan_is_pure(library_schema, library_topology, library_policy):
    a = plan_tables(library_schema, library_topology, library_policy)
    b = plan_tables(library_schema, library_topology, library_policy)
    assert a == b


def test_plan_json_round_trip(library_plan):
    doc = plan_to_json(library_plan)
    assert plan_from_json(doc) == library_plan
