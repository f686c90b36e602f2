"""Acceptance suite: one test per release criterion, in order.

Run with ``pytest tests/test_acceptance.py -v -s`` to see one line per
criterion. Tolerances are exact where stated; timing limits come from the
criteria themselves. Everything here runs against the Python package alone,
with no frontend built or served.
"""

import itertools
import json
import re
import time
from dataclasses import replace
from pathlib import Path

from click.testing import CliRunner
from trigger_walker import TriggerInterpreter, parse_trigger

from ddbforge import simulator as sim
from ddbforge.cli import main as cli_main
from ddbforge.codegen import emit_bundle, generate_bundle, generate_site_script
from ddbforge.ddl import parse_ddl
from ddbforge.errors import AmbiguousDerivationError
from ddbforge.fragmenter import FragmentationPlan, plan_tables
from ddbforge.policy import parse_policy
from ddbforge.topology import Site, Topology
from ddbforge.validator import validate

GOLDENS = Path(__file__).parent / "goldens"
FIXTURES = Path(__file__).parent / "fixtures"

EXPECTED_FILES = ["ENIT_DDB_SCRIPT.sql", "FST_DDB_SCRIPT.sql", "FSEGT_DDB_SCRIPT.sql"]


def _report(criterion: str, ok: bool, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    suffix = f" ({detail})" if detail else ""
    print(f"[acceptance] {status}: {criterion}{suffix}")
    assert ok, f"{criterion}{suffix}"


def test_criterion_fixture_reproduction(tmp_path, library_plan, library_topology):
    started = time.perf_counter()
    bundle = emit_bundle(library_plan, str(tmp_path))
    elapsed = time.perf_counter() - started

    names = sorted(p.name for p in tmp_path.iterdir())
    ok = names == sorted(EXPECTED_FILES + ["manifest.json"])

    for site in library_topology.sites:
        script = generate_site_script(library_plan, site)
        text = script.render()
        ok = ok and sum(1 for s in script.statements if s.kind == "dblink") == 2
        tables = [s for s in script.statements if s.kind == "table"]
        ok = ok and all(f"CONSTRAINT PK_{s.object_name} PRIMARY KEY" in s.text for s in tables)
        local_ids = {s.object_name for s in tables}
        synonyms = {s.object_name for s in script.statements if s.kind == "synonym"}
        ok = ok and not (synonyms & local_ids)  # synonyms cover only remote fragments
        mview = next(s.text for s in script.statements if s.object_name == "STUDENT" and s.kind == "mview")
        branches = re.findall(r"from (STUDENT_(?:ENIT|FST|FSEGT))\)", mview)
        ok = ok and branches == ["STUDENT_ENIT", "STUDENT_FST", "STUDENT_FSEGT"]
        ok = ok and mview.count(" UNION") == 2 and "next sysdate + 7" in mview
        trigger = next(s.text for s in script.statements if s.object_name == "ROUTE_STUDENT")
        ok = ok and "raise_application_error(-20009" in trigger
        ok = ok and text.endswith("\n")

    for name in EXPECTED_FILES + ["manifest.json"]:
        ok = ok and (tmp_path / name).read_bytes() == (GOLDENS / name).read_bytes()

    ok = ok and elapsed < 1.0
    _report("fixture reproduction (structure + byte-exact goldens)", ok, f"{elapsed:.3f}s")


def test_criterion_round_trip_law(library_plan, library_schema):
    started = time.perf_counter()
    failures = []
    for seed in range(100):
        data = sim.generate_dataset(library_schema, library_plan, seed=seed, max_rows=1000)
        result = sim.distribute(library_plan, data)
        outcome = sim.reconstruct(result, library_plan)
        for name, rel in data.relations.items():
            rebuilt = outcome.dataset.relations.get(name)
            if rebuilt is None or not sim.multiset_equal(rel.rows, rebuilt.rows):
                failures.append((seed, name))
    elapsed = time.perf_counter() - started
    ok = not failures and elapsed < 30.0
    _report(
        "round-trip law over 100 seeded datasets",
        ok,
        f"{elapsed:.1f}s, failures={failures[:5]}",
    )


def _synthetic_inputs(site_count: int):
    schema = parse_ddl(
        "CREATE TABLE T (ID NUMBER, C VARCHAR2(20), CONSTRAINT PK_T PRIMARY KEY (ID));"
    )
    sites = tuple(
        Site(
            logical_name=f"S{i}",
            network_address="127.0.0.1",
            user="ROOT",
            secret="root",
        )
        for i in range(1, site_count + 1)
    )
    return schema, Topology(sites)


def test_criterion_validator_oracle_equivalence():
    cases = 0
    disagreements = []
    configs = [(2, 3, False), (3, 3, False), (4, 3, False), (2, 4, False), (3, 3, True)]
    for site_count, domain_size, with_default in configs:
        schema, topology = _synthetic_inputs(site_count)
        domain = [f"V{i}" for i in range(domain_size)]
        site_names = list(topology.site_names)
        # Each domain value is assigned to one site, to the first two sites
        # (a deliberate overlap), or to none.
        choices = list(range(site_count)) + ["overlap", "none"]
        for combo in itertools.product(choices, repeat=domain_size):
            lists: dict[str, list] = {s: [] for s in site_names}
            for value, choice in zip(domain, combo):
                if choice == "none":
                    continue
                if choice == "overlap":
                    lists[site_names[0]].append(value)
                    lists[site_names[1]].append(value)
                else:
                    lists[site_names[choice]].append(value)
            assignments = {s: v for s, v in lists.items() if v}
            if not assignments:
                continue
            horizontal = {"column": "C", "assignments": assignments, "domain": domain}
            if with_default:
                horizontal["default_site"] = site_names[-1]
            policy = parse_policy(
                {"tables": [{"table": "T", "mode": "horizontal", "horizontal": horizontal}]},
                schema,
                topology,
            )
            plan = plan_tables(schema, topology, policy)
            verdicts = {v.criterion: v for v in validate(plan).for_table("T")}

            catch_all = with_default
            uncovered = overlapped = 0
            for value in domain:
                hits = sum(1 for vals in assignments.values() if value in vals)
                if catch_all and hits == 0:
                    hits = 1
                uncovered += hits == 0
                overlapped += hits >= 2
            expected_complete = uncovered == 0
            expected_disjoint = overlapped == 0
            if (verdicts["completeness"].level == "pass") != expected_complete or (
                verdicts["disjointness"].level == "pass"
            ) != expected_disjoint:
                disagreements.append((site_count, domain_size, with_default, combo))
            cases += 1
    ok = cases >= 500 and not disagreements
    _report(
        "validator agrees with brute-force enumeration",
        ok,
        f"{cases} cases, disagreements={disagreements[:3]}",
    )


def test_criterion_routing_agreement(library_plan, library_topology, library_schema, library_dataset):
    reject_codes = {-20009: "duplicate-pk", -20010: "unroutable", -20011: "fk-violation"}
    script = generate_site_script(library_plan, library_topology.sites[0])
    triggers = {
        s.object_name.removeprefix("ROUTE_"): parse_trigger(s.text)
        for s in script.statements
        if s.kind == "trigger"
    }

    datasets = [library_dataset] + [
        sim.generate_dataset(library_schema, library_plan, seed=seed, max_rows=40)
        for seed in range(3)
    ]
    rows_checked = 0
    mismatches = []
    for dataset in datasets:
        for table in library_plan.fragmented_tables():
            rest = sim.Dataset(
                {n: r for n, r in dataset.relations.items() if n != table}
            )
            image = sim.distribute(library_plan, rest).image
            interpreter = TriggerInterpreter(library_plan, image)
            interpreter.ast = triggers[table]
            for row in dataset.relations[table].rows:
                decision = sim.route_insert(library_plan, image, table, row)
                walked = interpreter.run(table, row)
                if decision.accepted:
                    expected = ("accept", {(p.site, p.fragment, p.row) for p in decision.placements})
                else:
                    expected_reason = decision.reason
                    kind, code = walked
                    if kind != "reject" or reject_codes[code] != expected_reason:
                        mismatches.append((table, row))
                        continue
                    rows_checked += 1
                    continue
                if walked != expected:
                    mismatches.append((table, row))
                rows_checked += 1
    ok = rows_checked > 0 and not mismatches
    _report(
        "trigger interpretation equals simulator routing",
        ok,
        f"{rows_checked} rows, mismatches={mismatches[:3]}",
    )


def test_criterion_determinism(library_plan):
    first = generate_bundle(library_plan)
    second = generate_bundle(library_plan)
    ok = first.manifest == second.manifest and all(
        a.render() == b.render() for a, b in zip(first.scripts, second.scripts)
    )
    _report("two generation runs produce identical digests", ok)


def test_criterion_negative_paths(tmp_path, library_schema, library_topology, library_plan):
    checks = []

    # Overlapping value lists: disjointness error and CLI exit 1.
    overlap_policy = tmp_path / "overlap.json"
    overlap_policy.write_text(
        json.dumps(
            {
                "tables": [
                    {
                        "table": "EMPLOYEE",
                        "mode": "horizontal",
                        "horizontal": {
                            "column": "ASSIGNMENT",
                            "assignments": {"ENIT": ["A"], "FST": ["A", "B"]},
                        },
                    }
                ]
            }
        ),
        encoding="utf-8",
    )
    result = CliRunner().invoke(
        cli_main,
        [
            "validate",
            "--schema", str(FIXTURES / "library.sql"),
            "--topology", str(FIXTURES / "topology.json"),
            "--policy", str(overlap_policy),
        ],
        env={"DDBFORGE_NO_COLOR": "1"},
    )
    checks.append(("overlap exit 1", result.exit_code == 1))
    checks.append(("overlap verdict", "disjointness: ERROR" in result.output))

    # Fragment missing its key: structural error in the report.
    broken_fragment = replace(
        library_plan.fragment("STUDENT_LIB_ENIT"), columns=("NB_BORROW", "ST_FNAME")
    )
    broken_plan = FragmentationPlan(
        schema=library_plan.schema,
        topology=library_plan.topology,
        policy=library_plan.policy,
        fragments=tuple(
            broken_fragment if f.id == broken_fragment.id else f
            for f in library_plan.fragments
        ),
        derived_edges=library_plan.derived_edges,
    )
    report = validate(broken_plan)
    structural = [v for v in report.verdicts if v.criterion == "structural"]
    checks.append(
        (
            "missing-key structural error",
            report.overall == "invalid"
            and any("NCE" in m for v in structural for m in v.messages),
        )
    )
    checks.append(("structural verdicts come last", report.verdicts[-1].criterion == "structural"))

    # Open domain with no catch-all: completeness indeterminate.
    open_policy = parse_policy(
        {
            "tables": [
                {
                    "table": "EMPLOYEE",
                    "mode": "horizontal",
                    "horizontal": {
                        "column": "ASSIGNMENT",
                        "assignments": {"ENIT": ["A"], "FST": ["B"]},
                    },
                }
            ]
        },
        library_schema,
        library_topology,
    )
    open_plan = plan_tables(library_schema, library_topology, open_policy)
    verdicts = {v.criterion: v for v in validate(open_plan).for_table("EMPLOYEE")}
    checks.append(("open domain indeterminate", verdicts["completeness"].level == "indeterminate"))

    # Ambiguous derivation: a diagnostic naming the candidates, not a guess.
    ambiguous = parse_policy(
        {
            "tables": [
                {
                    "table": "BOOKS",
                    "mode": "horizontal",
                    "horizontal": {
                        "column": "AREA",
                        "assignments": {"ENIT": ["CS"], "FST": ["MATH"]},
                    },
                },
                {
                    "table": "STUDENT",
                    "mode": "horizontal",
                    "horizontal": {
                        "column": "INSTITUTION",
                        "assignments": {"ENIT": ["ENIT"], "FST": ["FST"], "FSEGT": ["FSEGT"]},
                    },
                },
            ]
        },
        library_schema,
        library_topology,
    )
    try:
        plan_tables(library_schema, library_topology, ambiguous)
        checks.append(("ambiguity diagnosed", False))
    except AmbiguousDerivationError as exc:
        checks.append(
            (
                "ambiguity diagnosed",
                exc.table == "LOANS" and set(exc.parents) == {"BOOKS", "STUDENT"},
            )
        )

    failed = [name for name, passed in checks if not passed]
    _report("negative paths behave as specified", not failed, f"failed={failed}")
