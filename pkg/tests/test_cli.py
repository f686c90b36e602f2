import json

from click.testing import CliRunner

from ddbforge.cli import main


def _write_policy(tmp_path, doc):
    path = tmp_path / "policy.json"
    path.write_text(json.dumps(doc), encoding="utf-8")
    return str(path)


def _invoke(args):
    return CliRunner().invoke(main, args, env={"DDBFORGE_NO_COLOR": "1"})


def test_validate_fixture_ok(fixture_paths):
    result = _invoke(
        [
            "validate",
            "--schema", fixture_paths["schema"],
            "--topology", fixture_paths["topology"],
            "--policy", fixture_paths["policy"],
        ]
    )
    assert result.exit_code == 0, result.output
    assert "overall: valid_with_warnings" in result.output


def test_validate_json_matches_text(fixture_paths):
    text = _invoke(
        ["validate", "--schema", fixture_paths["schema"], "--topology",
         fixture_paths["topology"], "--policy", fixture_paths["policy"]]
    )
    as_json = _invoke(
        ["validate", "--schema", fixture_paths["schema"], "--topology",
         fixture_paths["topology"], "--policy", fixture_paths["policy"], "--format", "json"]
    )
    doc = json.loads(as_json.output)
    assert doc["overall"] == "valid_with_warnings"
    # Same verdict set in both renderings.
    for verdict in doc["verdicts"]:
        assert f"{verdict['table']} {verdict['criterion']}: {verdict['level'].upper()}" in text.output


def test_generate_fixture(tmp_path, fixture_paths):
    out = tmp_path / "scripts"
    result = _invoke(
        [
            "generate",
            "--schema", fixture_paths["schema"],
            "--topology", fixture_paths["topology"],
            "--policy", fixture_paths["policy"],
            "--out", str(out),
        ]
    )
    assert result.exit_code == 0, result.output
    names = sorted(p.name for p in out.iterdir())
    assert names == [
        "ENIT_DDB_SCRIPT.sql",
        "FSEGT_DDB_SCRIPT.sql",
        "FST_DDB_SCRIPT.sql",
        "manifest.json",
    ]
    assert "generating despite validation warnings" in result.stderr


def test_overlapping_values_exit_1(tmp_path, fixture_paths):
    policy = _write_policy(
        tmp_path,
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
        },
    )
    result = _invoke(
        ["validate", "--schema", fixture_paths["schema"], "--topology",
         fixture_paths["topology"], "--policy", policy]
    )
    assert result.exit_code == 1
    assert "disjointness: ERROR" in result.output

    out = tmp_path / "nope"
    gen = _invoke(
        ["generate", "--schema", fixture_paths["schema"], "--topology",
         fixture_paths["topology"], "--policy", policy, "--out", str(out)]
    )
    assert gen.exit_code == 1
    assert not out.exists()


def test_ddl_typo_exit_2(tmp_path, fixture_paths):
    bad = tmp_path / "bad.sql"
    bad.write_text("CREATE TABLE X (A NUMBRR);", encoding="utf-8")
    result = _invoke(
        ["validate", "--schema", str(bad), "--topology", fixture_paths["topology"],
         "--policy", fixture_paths["policy"]]
    )
    assert result.exit_code == 2
    assert "line 1" in result.stderr


def test_ambiguous_derivation_exit_1(tmp_path, fixture_paths):
    policy = _write_policy(
        tmp_path,
        {
            "tables": [
                {
                    "table": "BOOKS",
                    "mode": "horizontal",
                    "horizontal": {"column": "AREA", "assignments": {"ENIT": ["CS"], "FST": ["MATH"]}},
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
    )
    result = _invoke(
        ["validate", "--schema", fixture_paths["schema"], "--topology",
         fixture_paths["topology"], "--policy", policy]
    )
    assert result.exit_code == 1
    assert "derive_from" in result.output


def test_plan_emit(tmp_path, fixture_paths):
    emitted = tmp_path / "plan.json"
    result = _invoke(
        ["plan", "--schema", fixture_paths["schema"], "--topology", fixture_paths["topology"],
         "--policy", fixture_paths["policy"], "--emit", str(emitted)]
    )
    assert result.exit_code == 0
    doc = json.loads(emitted.read_text())
    assert [f["id"] for f in doc["fragments"]][:3] == ["STUDENT_ENIT", "STUDENT_FST", "STUDENT_FSEGT"]
    assert json.loads(result.output) == doc


def test_simulate_with_data(fixture_paths):
    result = _invoke(
        ["simulate", "--schema", fixture_paths["schema"], "--topology", fixture_paths["topology"],
         "--policy", fixture_paths["policy"], "--data", fixture_paths["data"], "--format", "json"]
    )
    assert result.exit_code == 0, result.output
    doc = json.loads(result.output)
    assert doc["round_trip_ok"] is True
    assert doc["fragments"]["STUDENT_LIB_ENIT"] == 6


def test_simulate_with_seed(fixture_paths):
    result = _invoke(
        ["simulate", "--schema", fixture_paths["schema"], "--topology", fixture_paths["topology"],
         "--policy", fixture_paths["policy"], "--seed", "7", "--format", "json"]
    )
    assert result.exit_code == 0, result.output
    assert json.loads(result.output)["round_trip_ok"] is True


def test_simulate_requires_data_or_seed(fixture_paths):
    result = _invoke(
        ["simulate", "--schema", fixture_paths["schema"], "--topology", fixture_paths["topology"],
         "--policy", fixture_paths["policy"]]
    )
    assert result.exit_code == 2
