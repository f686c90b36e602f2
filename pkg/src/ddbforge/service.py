"""Project-scoped HTTP API for the design wizard.

The service is a thin adapter over the library: every endpoint's result is
exactly what the corresponding library call returns on the same inputs.
Projects live in memory, optionally written through to one JSON document
per project; concurrent edits are guarded by an optimistic version token
(send the last seen ``version`` as a query parameter on mutations).
"""

from __future__ import annotations

import io
import json
import secrets
import threading
import zipfile
from dataclasses import dataclass, field

from fastapi import FastAPI, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .codegen import generate_bundle, script_filename
from .ddl import parse_ddl
from .diagnostics import Diagnostic, has_errors
from .errors import DdbforgeError, DdlSyntaxError, PlanError
from .fragmenter import plan_tables, plan_to_json
from .policy import parse_policy
from .schema import Schema, check_schema, schema_to_json
from .simulator import (
    check_global_integrity,
    distribute,
    generate_dataset,
    load_dataset,
    multiset_equal,
    reconstruct,
)
from .topology import Topology, topology_from_json, topology_to_json, validate_topology
from .validator import INVALID, report_to_json, validate
from .values import to_json


@dataclass
class Project:
    id: str
    name: str
    version: int = 0
    schema: Schema | None = None
    schema_ddl: str = ""
    topology: Topology | None = None
    policy_entries: dict[str, dict] = field(default_factory=dict)
    last_report: dict | None = None
    report_version: int = -1


class ProjectStore:
    def __init__(self, persist_dir: str | None = None):
        self._lock = threading.Lock()
        self._projects: dict[str, Project] = {}
        self._persist_dir = persist_dir
        if persist_dir:
            self._load_all()

    def _path(self, project_id: str) -> str:
        assert self._persist_dir is not None
        return f"{self._persist_dir}/{project_id}.json"

    def _load_all(self) -> None:
        import os

        assert self._persist_dir is not None
        os.makedirs(self._persist_dir, exist_ok=True)
        for entry in sorted(os.listdir(self._persist_dir)):
            if not entry.endswith(".json"):
                continue
            with open(f"{self._persist_dir}/{entry}", "r", encoding="utf-8") as fh:
                doc = json.load(fh)
            project = Project(id=doc["id"], name=doc["name"], version=doc["version"])
            if doc.get("schema_ddl"):
                project.schema_ddl = doc["schema_ddl"]
                project.schema = parse_ddl(project.schema_ddl)
            if doc.get("topology"):
                project.topology = topology_from_json(doc["topology"])
            project.policy_entries = dict(doc.get("policy_entries", {}))
            project.last_report = doc.get("last_report")
            project.report_version = doc.get("report_version", -1)
            self._projects[project.id] = project

    def _persist(self, project: Project) -> None:
        if not self._persist_dir:
            return
        doc = {
            "id": project.id,
            "name": project.name,
            "version": project.version,
            "schema_ddl": project.schema_ddl,
            "topology": topology_to_json(project.topology) if project.topology else None,
            "policy_entries": project.policy_entries,
            "last_report": project.last_report,
            "report_version": project.report_version,
        }
        with open(self._path(project.id), "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2)

    def create(self, name: str) -> Project:
        with self._lock:
            project_id = secrets.token_hex(8)
            project = Project(id=project_id, name=name)
            self._projects[project_id] = project
            self._persist(project)
            return project

    def get(self, project_id: str) -> Project | None:
        with self._lock:
            return self._projects.get(project_id)

    def mutate(self, project: Project) -> None:
        with self._lock:
            project.version += 1
            self._persist(project)

    def save(self, project: Project) -> None:
        with self._lock:
            self._persist(project)


def _diag_json(diagnostics: list[Diagnostic]) -> list[dict]:
    return [
        {"severity": d.severity, "code": d.code, "message": d.message} for d in diagnostics
    ]


def _error(status: int, message: str, diagnostics: list[dict] | None = None) -> JSONResponse:
    body: dict = {"error": message}
    if diagnostics is not None:
        body["diagnostics"] = diagnostics
    return JSONResponse(status_code=status, content=body)


def _project_summary(project: Project) -> dict:
    return {
        "id": project.id,
        "name": project.name,
        "version": project.version,
        "schema": schema_to_json(project.schema) if project.schema else None,
        "schema_ddl": project.schema_ddl or None,
        "topology": topology_to_json(project.topology) if project.topology else None,
        "policy": {"tables": list(project.policy_entries.values())},
        "last_report": project.last_report,
        "report_version": project.report_version,
    }


def _stale(project: Project, request: Request) -> bool:
    token = request.query_params.get("version")
    return token is not None and token != str(project.version)


def _project_policy(project: Project):
    doc = {"tables": list(project.policy_entries.values())}
    assert project.schema is not None and project.topology is not None
    return parse_policy(doc, project.schema, project.topology)


def _build_project_plan(project: Project):
    policy = _project_policy(project)
    assert project.schema is not None and project.topology is not None
    return plan_tables(project.schema, project.topology, policy)


def create_app(persist_dir: str | None = None, static_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="ddbforge service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    store = ProjectStore(persist_dir=persist_dir)
    app.state.store = store
    if static_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=static_dir, html=True), name="wizard")

    async def _json_body(request: Request) -> tuple[dict | None, JSONResponse | None]:
        try:
            raw = await request.body()
            doc = json.loads(raw.decode("utf-8")) if raw else {}
        except (UnicodeDecodeError, json.JSONDecodeError):
            return None, _error(400, "request body is not valid JSON")
        if not isinstance(doc, dict):
            return None, _error(400, "request body must be a JSON object")
        return doc, None

    @app.post("/api/projects")
    async def create_project(request: Request):
        doc, err = await _json_body(request)
        if err:
            return err
        name = doc.get("name", "untitled")
        if not isinstance(name, str):
            return _error(400, "name must be a string")
        project = store.create(name)
        return _project_summary(project)

    @app.get("/api/projects/{project_id}")
    async def get_project(project_id: str):
        project = store.get(project_id)
        if project is None:
            return _error(404, f"unknown project {project_id}")
        return _project_summary(project)

    @app.put("/api/projects/{project_id}/schema")
    async def put_schema(project_id: str, request: Request):
        project = store.get(project_id)
        if project is None:
            return _error(404, f"unknown project {project_id}")
        if _stale(project, request):
            return _error(409, "stale version; reload the project")
        raw = await request.body()
        try:
            text = raw.decode("utf-8")
        except UnicodeDecodeError:
            return _error(400, "schema body must be UTF-8 text")
        try:
            schema = parse_ddl(text)
        except DdlSyntaxError as exc:
            return _error(
                422,
                "schema does not parse",
                [{"severity": "error", "code": "syntax", "message": str(exc),
                  "line": exc.line, "column": exc.column}],
            )
        except DdbforgeError as exc:
            return _error(422, "schema rejected", [{"severity": "error", "code": "schema", "message": str(exc)}])
        diagnostics = check_schema(schema)
        if has_errors(diagnostics):
            return _error(422, "schema has unresolved references", _diag_json(diagnostics))
        project.schema = schema
        project.schema_ddl = text
        store.mutate(project)
        return {"diagnostics": _diag_json(diagnostics), "version": project.version,
                "tables": schema_to_json(schema)["tables"]}

    @app.put("/api/projects/{project_id}/topology")
    async def put_topology(project_id: str, request: Request):
        project = store.get(project_id)
        if project is None:
            return _error(404, f"unknown project {project_id}")
        if _stale(project, request):
            return _error(409, "stale version; reload the project")
        doc, err = await _json_body(request)
        if err:
            return err
        try:
            topology = topology_from_json(doc)
        except DdbforgeError as exc:
            return _error(422, "topology rejected", [{"severity": "error", "code": "topology", "message": str(exc)}])
        diagnostics = validate_topology(topology)
        if has_errors(diagnostics):
            return _error(422, "topology is inconsistent", _diag_json(diagnostics))
        project.topology = topology
        store.mutate(project)
        return {"diagnostics": _diag_json(diagnostics), "version": project.version}

    @app.put("/api/projects/{project_id}/policy/tables/{table}")
    async def put_table_policy(project_id: str, table: str, request: Request):
        project = store.get(project_id)
        if project is None:
            return _error(404, f"unknown project {project_id}")
        if project.schema is None or project.topology is None:
            return _error(409, "set schema and topology before the policy")
        if _stale(project, request):
            return _error(409, "stale version; reload the project")
        table = table.upper()
        if table not in project.schema:
            return _error(404, f"unknown table {table}")
        doc, err = await _json_body(request)
        if err:
            return err
        doc = dict(doc)
        doc.setdefault("table", table)
        if str(doc["table"]).upper() != table:
            return _error(400, "body table does not match the URL table")
        trial = dict(project.policy_entries)
        trial[table] = doc
        try:
            parse_policy({"tables": list(trial.values())}, project.schema, project.topology)
        except DdbforgeError as exc:
            return _error(422, "policy rejected", [{"severity": "error", "code": "policy", "message": str(exc)}])
        project.policy_entries = trial
        store.mutate(project)
        return {"version": project.version, "policy": {"tables": list(project.policy_entries.values())}}

    @app.post("/api/projects/{project_id}/validate")
    async def validate_project(project_id: str):
        project = store.get(project_id)
        if project is None:
            return _error(404, f"unknown project {project_id}")
        if project.schema is None or project.topology is None:
            return _error(409, "set schema and topology before validating")
        try:
            plan = _build_project_plan(project)
        except PlanError as exc:
            return _error(422, "planning failed", [{"severity": "error", "code": "plan", "message": str(exc)}])
        report = report_to_json(validate(plan))
        project.last_report = report
        project.report_version = project.version
        store.save(project)
        return {"report": report, "version": project.version, "plan": plan_to_json(plan)}

    @app.post("/api/projects/{project_id}/plan")
    async def plan_project(project_id: str):
        project = store.get(project_id)
        if project is None:
            return _error(404, f"unknown project {project_id}")
        if project.schema is None or project.topology is None:
            return _error(409, "set schema and topology before planning")
        try:
            plan = _build_project_plan(project)
        except PlanError as exc:
            return _error(422, "planning failed", [{"severity": "error", "code": "plan", "message": str(exc)}])
        return plan_to_json(plan)

    @app.post("/api/projects/{project_id}/generate")
    async def generate_project(project_id: str, request: Request):
        project = store.get(project_id)
        if project is None:
            return _error(404, f"unknown project {project_id}")
        if project.schema is None or project.topology is None:
            return _error(409, "set schema and topology before generating")
        if project.last_report is None or project.report_version != project.version:
            return _error(409, "validate the current inputs before generating")
        if project.last_report.get("overall") == INVALID:
            return _error(409, "the last validation report is invalid; fix the policy first")
        redact = request.query_params.get("redact") in ("1", "true", "yes")
        try:
            plan = _build_project_plan(project)
            bundle = generate_bundle(plan, redact=redact)
        except (PlanError, DdbforgeError) as exc:
            return _error(422, "generation failed", [{"severity": "error", "code": "codegen", "message": str(exc)}])
        buffer = io.BytesIO()
        with zipfile.ZipFile(buffer, "w", zipfile.ZIP_DEFLATED) as archive:
            for site, script in zip(plan.topology.sites, bundle.scripts):
                archive.writestr(script_filename(site), script.render())
            archive.writestr("manifest.json", json.dumps(bundle.manifest, indent=2, sort_keys=True) + "\n")
        return Response(
            content=buffer.getvalue(),
            media_type="application/zip",
            headers={"Content-Disposition": f'attachment; filename="{project.name or project.id}_scripts.zip"'},
        )

    @app.post("/api/projects/{project_id}/simulate")
    async def simulate_project(project_id: str, request: Request):
        project = store.get(project_id)
        if project is None:
            return _error(404, f"unknown project {project_id}")
        if project.schema is None or project.topology is None:
            return _error(409, "set schema and topology before simulating")
        doc, err = await _json_body(request)
        if err:
            return err
        try:
            plan = _build_project_plan(project)
        except PlanError as exc:
            return _error(422, "planning failed", [{"severity": "error", "code": "plan", "message": str(exc)}])
        try:
            if "data" in doc and doc["data"] is not None:
                dataset = load_dataset(doc["data"], project.schema)
            else:
                seed = doc.get("seed", 0)
                if not isinstance(seed, int):
                    return _error(400, "seed must be an integer")
                dataset = generate_dataset(
                    project.schema, plan, seed=seed, max_rows=int(doc.get("rows", 50))
                )
        except DdbforgeError as exc:
            return _error(422, "dataset rejected", [{"severity": "error", "code": "data", "message": str(exc)}])
        result = distribute(plan, dataset)
        violations = check_global_integrity(result.image, plan)
        outcome = reconstruct(result, plan)
        round_trip_ok = all(
            name in outcome.dataset.relations
            and multiset_equal(rel.rows, outcome.dataset.relations[name].rows)
            for name, rel in dataset.relations.items()
        )
        return {
            "fragments": {
                frag.id: len(result.image.sites[frag.site][frag.id].rows)
                for frag in plan.fragments
            },
            "unrouted": [
                {"table": u.table, "reason": u.reason, "row": [to_json(v) for v in u.row]}
                for u in result.unrouted
            ],
            "integrity_violations": [
                {"kind": v.kind, "table": v.table, "message": v.message} for v in violations
            ],
            "replica_divergences": [d.describe() for d in outcome.divergences],
            "round_trip_ok": round_trip_ok,
        }

    return app


app = create_app()
