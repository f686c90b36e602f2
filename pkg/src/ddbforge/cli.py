"""Command-line entry point for batch use and CI.

Exit codes: 0 success/valid, 1 validation errors, 2 input or parse errors,
3 I/O errors. Set ``DDBFORGE_NO_COLOR`` to disable ANSI styling.
"""

from __future__ import annotations

import json
import os
import sys

import click

from . import simulator
from .codegen import emit_bundle, script_filename
from .ddl import parse_ddl
from .diagnostics import Diagnostic, has_errors
from .errors import DdbforgeError, PlanError
from .fragmenter import FragmentationPlan, plan_tables, plan_to_json
from .policy import load_policy
from .schema import Schema, check_schema
from .simulator import generate_dataset, load_dataset
from .topology import Topology, load_topology, validate_topology
from .validator import (
    ERROR,
    INVALID,
    STRUCTURAL,
    ValidationReport,
    Verdict,
    render_report_json,
    render_report_text,
    validate,
)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_INPUT = 2
EXIT_IO = 3


def _color_enabled() -> bool:
    return not os.environ.get("DDBFORGE_NO_COLOR")


def _fail(message: str, code: int) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _print_diagnostics(diagnostics: list[Diagnostic], source: str) -> None:
    for d in diagnostics:
        click.echo(f"{source}: {d}", err=True)


def _load_inputs(schema_path: str, topology_path: str, policy_path: str):
    try:
        with open(schema_path, "r", encoding="utf-8") as fh:
            schema = parse_ddl(fh.read())
    except OSError as exc:
        _fail(f"cannot read schema: {exc}", EXIT_IO)
    except DdbforgeError as exc:
        _fail(f"schema: {exc}", EXIT_INPUT)

    schema_diags = check_schema(schema)
    _print_diagnostics(schema_diags, "schema")
    if has_errors(schema_diags):
        sys.exit(EXIT_INPUT)

    try:
        topology = load_topology(topology_path)
    except OSError as exc:
        _fail(f"cannot read topology: {exc}", EXIT_IO)
    except DdbforgeError as exc:
        _fail(f"topology: {exc}", EXIT_INPUT)

    topo_diags = validate_topology(topology)
    _print_diagnostics(topo_diags, "topology")
    if has_errors(topo_diags):
        sys.exit(EXIT_INPUT)

    try:
        policy = load_policy(policy_path, schema, topology)
    except OSError as exc:
        _fail(f"cannot read policy: {exc}", EXIT_IO)
    except DdbforgeError as exc:
        _fail(f"policy: {exc}", EXIT_INPUT)
    return schema, topology, policy


def _build_plan(schema: Schema, topology: Topology, policy) -> FragmentationPlan:
    try:
        return plan_tables(schema, topology, policy)
    except PlanError as exc:
        table = getattr(exc, "table", "")
        report = ValidationReport(
            verdicts=(Verdict(STRUCTURAL, ERROR, table or "PLAN", (str(exc),)),),
            overall=INVALID,
        )
        click.echo(render_report_text(report), nl=False)
        sys.exit(EXIT_VALIDATION)


def _styled_overall(overall: str) -> str:
    if not _color_enabled():
        return overall
    color = {"valid": "green", "valid_with_warnings": "yellow"}.get(overall, "red")
    return click.style(overall, fg=color)


_schema_opt = click.option("--schema", "schema_path", required=True, help="DDL file (UTF-8)")
_topology_opt = click.option("--topology", "topology_path", required=True, help="topology JSON file")
_policy_opt = click.option("--policy", "policy_path", required=True, help="policy JSON file")
_format_opt = click.option(
    "--format", "output_format", type=click.Choice(["text", "json"]), default="text"
)


@click.group()
def main() -> None:
    """Compile a distribution design into per-site SQL scripts."""


@main.command("validate")
@_schema_opt
@_topology_opt
@_policy_opt
@click.option("--data", "data_path", default=None, help="sample dataset JSON for empirical checks")
@_format_opt
def cmd_validate(schema_path, topology_path, policy_path, data_path, output_format) -> None:
    """Plan the fragmentation and print the validation report."""
    schema, topology, policy = _load_inputs(schema_path, topology_path, policy_path)
    plan = _build_plan(schema, topology, policy)
    data = None
    if data_path:
        data = _load_data_file(data_path, schema)
    report = validate(plan, data=data)
    if output_format == "json":
        click.echo(render_report_json(report), nl=False)
    else:
        click.echo(render_report_text(report), nl=False)
        click.echo(f"result: {_styled_overall(report.overall)}", err=True)
    sys.exit(EXIT_VALIDATION if report.overall == INVALID else EXIT_OK)


@main.command("plan")
@_schema_opt
@_topology_opt
@_policy_opt
@click.option("--emit", "emit_path", default=None, help="also write the plan document to a file")
def cmd_plan(schema_path, topology_path, policy_path, emit_path) -> None:
    """Print the resolved fragmentation plan as canonical JSON."""
    schema, topology, policy = _load_inputs(schema_path, topology_path, policy_path)
    plan = _build_plan(schema, topology, policy)
    document = json.dumps(plan_to_json(plan), indent=2) + "\n"
    if emit_path:
        try:
            with open(emit_path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(document)
        except OSError as exc:
            _fail(f"cannot write plan: {exc}", EXIT_IO)
    click.echo(document, nl=False)


@main.command("generate")
@_schema_opt
@_topology_opt
@_policy_opt
@click.option("--out", "out_dir", required=True, help="output directory for the script files")
@click.option("--redact", is_flag=True, help="mask credentials in generated scripts")
@_format_opt
def cmd_generate(schema_path, topology_path, policy_path, out_dir, redact, output_format) -> None:
    """Validate, then write one implementation script per site."""
    schema, topology, policy = _load_inputs(schema_path, topology_path, policy_path)
    plan = _build_plan(schema, topology, policy)
    report = validate(plan)
    if report.overall == INVALID:
        click.echo(render_report_text(report), nl=False, err=True)
        _fail("validation failed; not generating scripts", EXIT_VALIDATION)
    if report.overall != "valid":
        click.echo("warning: generating despite validation warnings:", err=True)
        click.echo(render_report_text(report), nl=False, err=True)
    try:
        bundle = emit_bundle(plan, out_dir, redact=redact)
    except OSError as exc:
        _fail(f"cannot write scripts: {exc}", EXIT_IO)
    if output_format == "json":
        click.echo(json.dumps({"out_dir": out_dir, "manifest": bundle.manifest}, indent=2))
    else:
        for site in topology.sites:
            click.echo(os.path.join(out_dir, script_filename(site)))
        click.echo(os.path.join(out_dir, "manifest.json"))


def _load_data_file(path: str, schema: Schema):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        _fail(f"cannot read data: {exc}", EXIT_IO)
    except json.JSONDecodeError as exc:
        _fail(f"data: not valid JSON: {exc}", EXIT_INPUT)
    try:
        return load_dataset(doc, schema)
    except DdbforgeError as exc:
        _fail(f"data: {exc}", EXIT_INPUT)


@main.command("simulate")
@_schema_opt
@_topology_opt
@_policy_opt
@click.option("--data", "data_path", default=None, help="sample dataset JSON")
@click.option("--seed", type=int, default=None, help="generate a random dataset instead")
@click.option("--rows", type=int, default=50, help="max rows per table for --seed")
@_format_opt
def cmd_simulate(schema_path, topology_path, policy_path, data_path, seed, rows, output_format) -> None:
    """Distribute sample data, check integrity and round-trip the relations."""
    if data_path is None and seed is None:
        _fail("simulate needs --data or --seed", EXIT_INPUT)
    schema, topology, policy = _load_inputs(schema_path, topology_path, policy_path)
    plan = _build_plan(schema, topology, policy)
    if data_path is not None:
        dataset = _load_data_file(data_path, schema)
    else:
        dataset = generate_dataset(schema, plan, seed=seed, max_rows=rows)

    result = simulator.distribute(plan, dataset)
    violations = simulator.check_global_integrity(result.image, plan)
    outcome = simulator.reconstruct(result, plan)
    round_trip_ok = all(
        name in outcome.dataset.relations
        and simulator.multiset_equal(rel.rows, outcome.dataset.relations[name].rows)
        for name, rel in dataset.relations.items()
    )

    summary = {
        "fragments": {
            frag.id: len(result.image.sites[frag.site][frag.id].rows) for frag in plan.fragments
        },
        "unrouted": [
            {"table": u.table, "reason": u.reason, "row": [simulator.to_json(v) for v in u.row]}
            for u in result.unrouted
        ],
        "integrity_violations": [
            {"kind": v.kind, "table": v.table, "message": v.message} for v in violations
        ],
        "replica_divergences": [d.describe() for d in outcome.divergences],
        "round_trip_ok": round_trip_ok,
    }
    if output_format == "json":
        click.echo(json.dumps(summary, indent=2))
    else:
        click.echo("rows per fragment:")
        for frag_id, count in summary["fragments"].items():
            click.echo(f"  {frag_id}: {count}")
        for key in ("unrouted", "integrity_violations", "replica_divergences"):
            if summary[key]:
                click.echo(f"{key.replace('_', ' ')}:")
                for item in summary[key]:
                    click.echo(f"  {item}")
        click.echo(f"round trip ok: {round_trip_ok}")
    bad = result.unrouted or violations or outcome.divergences or not round_trip_ok
    sys.exit(EXIT_VALIDATION if bad else EXIT_OK)


@main.command("serve")
@click.option("--port", type=int, default=8400)
@click.option("--host", default="127.0.0.1")
@click.option("--persist-dir", default=None, help="write-through project storage directory")
@click.option("--static-dir", default=None, help="serve the built wizard assets under /ui")
def cmd_serve(port, host, persist_dir, static_dir) -> None:
    """Run the HTTP API used by the design wizard."""
    import uvicorn

    from .service import create_app

    uvicorn.run(
        create_app(persist_dir=persist_dir, static_dir=static_dir),
        host=host,
        port=port,
        log_level="warning",
    )


if __name__ == "__main__":
    main()
