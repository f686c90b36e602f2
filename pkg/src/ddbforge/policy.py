"""Declarative distribution policy: what is fragmented, how, and where.

The policy document is strict JSON (unknown fields rejected so typos never
pass silently)::

    {
      "tables": [
        {
          "table": "STUDENT",
          "mode": "hybrid",                  # none|horizontal|vertical|hybrid|replicate_full
          "horizontal": {
            "column": "INSTITUTION",
            "assignments": {"ENIT": ["ENIT"], "FST": ["FST"]},
            "default_site": null,            # optional catch-all site
            "domain": ["ENIT", "FST"]        # optional declared value domain
          },
          "vertical": [
            {"name": "STUDENT_LIB",
             "columns": ["NCE", "NB_BORROW"],
             "sites": ["ENIT", "FST"],       # replication targets
             "primary_site": "ENIT",
             "shared_columns": []}           # non-PK columns deliberately duplicated
          ],
          "refresh": {"mode": "complete", "interval_days": 7},
          "derive_from": null                # parent preference for derived fragmentation
        }
      ]
    }

Hybrid semantics: the vertical list decomposes the table; every vertical
fragment containing the horizontal column is split horizontally across the
assignment sites (its ``sites``/``primary_site`` may be omitted and are
filled from the assignments), while fragments without it are allocated or
replicated to their declared sites.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import PolicyError
from .schema import Schema
from .topology import Topology
from .values import coerce, to_json

MODES = ("none", "horizontal", "vertical", "hybrid", "replicate_full")

DEFAULT_REFRESH_DAYS = 7


@dataclass(frozen=True)
class RefreshPolicy:
    mode: str = "complete"  # "complete" | "fast"
    interval_days: int = DEFAULT_REFRESH_DAYS

    def __post_init__(self) -> None:
        if self.mode not in ("complete", "fast"):
            raise PolicyError(f"refresh mode must be complete or fast, got {self.mode!r}")
        if self.interval_days < 1:
            raise PolicyError("refresh interval must be >= 1 day")


@dataclass(frozen=True)
class HorizontalSpec:
    column: str
    assignments: tuple[tuple[str, tuple], ...]  # (site, value list), topology order
    default_site: str | None = None
    declared_domain: tuple | None = None

    def assignment_map(self) -> dict[str, tuple]:
        return dict(self.assignments)

    @property
    def sites(self) -> tuple[str, ...]:
        return tuple(site for site, _ in self.assignments)


@dataclass(frozen=True)
class VerticalFragmentSpec:
    fragment_name: str
    columns: tuple[str, ...]  # declared order, PK auto-included up front
    sites: tuple[str, ...]
    primary_site: str
    shared_columns: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not self.sites:
            raise PolicyError(f"fragment {self.fragment_name}: needs at least one site")
        if self.primary_site not in self.sites:
            raise PolicyError(
                f"fragment {self.fragment_name}: primary site {self.primary_site} "
                f"is not among its sites"
            )


@dataclass(frozen=True)
class TablePolicy:
    table: str
    mode: str
    horizontal: HorizontalSpec | None = None
    vertical: tuple[VerticalFragmentSpec, ...] = ()
    refresh: RefreshPolicy = field(default_factory=RefreshPolicy)
    derive_from: str | None = None

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise PolicyError(f"unknown mode {self.mode!r} for table {self.table}")
        if self.mode in ("horizontal", "hybrid") and self.horizontal is None:
            raise PolicyError(f"table {self.table}: mode {self.mode} requires a horizontal spec")
        if self.mode in ("vertical", "hybrid") and not self.vertical:
            raise PolicyError(f"table {self.table}: mode {self.mode} requires vertical fragments")
        if self.mode in ("none", "replicate_full") and (self.horizontal or self.vertical):
            raise PolicyError(f"table {self.table}: mode {self.mode} takes no fragment specs")


@dataclass(frozen=True)
class DistributionPolicy:
    policies: tuple[TablePolicy, ...] = ()

    def __post_init__(self) -> None:
        seen: set[str] = set()
        for p in self.policies:
            if p.table in seen:
                raise PolicyError(f"more than one policy entry for table {p.table}")
            seen.add(p.table)

    def for_table(self, table: str) -> TablePolicy | None:
        for p in self.policies:
            if p.table == table:
                return p
        return None

    @property
    def tables(self) -> tuple[str, ...]:
        return tuple(p.table for p in self.policies)


def _require_fields(doc: dict, allowed: set[str], where: str) -> None:
    unknown = set(doc) - allowed
    if unknown:
        raise PolicyError(f"{where}: unknown fields {sorted(unknown)}")


def _parse_horizontal(doc: dict, table, topology: Topology, where: str) -> HorizontalSpec:
    _require_fields(doc, {"column", "assignments", "default_site", "domain"}, where)
    for req in ("column", "assignments"):
        if req not in doc:
            raise PolicyError(f"{where}: missing required field {req!r}")
    column = str(doc["column"]).upper()
    if not table.has_column(column):
        raise PolicyError(f"{where}: table {table.name} has no column {column}")
    ctype = table.column(column).ctype

    raw_assignments = doc["assignments"]
    if not isinstance(raw_assignments, dict) or not raw_assignments:
        raise PolicyError(f"{where}: assignments must be a non-empty object of site -> values")
    by_site: dict[str, tuple] = {}
    for site_name, values in raw_assignments.items():
        site_name = str(site_name).upper()
        if site_name not in topology:
            raise PolicyError(f"{where}: unknown site {site_name}")
        if not isinstance(values, list) or not values:
            raise PolicyError(f"{where}: value list for site {site_name} must be non-empty")
        typed = tuple(coerce(ctype, v, f"{where}.assignments[{site_name}]") for v in values)
        if len(set(typed)) != len(typed):
            raise PolicyError(f"{where}: duplicate values in list for site {site_name}")
        by_site[site_name] = typed
    # Normalize to topology order so downstream output never depends on
    # document key order.
    assignments = tuple(
        (s.logical_name, by_site[s.logical_name])
        for s in topology.sites
        if s.logical_name in by_site
    )

    default_site = doc.get("default_site")
    if default_site is not None:
        default_site = str(default_site).upper()
        if default_site not in topology:
            raise PolicyError(f"{where}: unknown default site {default_site}")

    domain = doc.get("domain")
    declared_domain = None
    if domain is not None:
        if not isinstance(domain, list) or not domain:
            raise PolicyError(f"{where}: domain must be a non-empty array")
        declared_domain = tuple(coerce(ctype, v, f"{where}.domain") for v in domain)
        if len(set(declared_domain)) != len(declared_domain):
            raise PolicyError(f"{where}: duplicate values in domain")

    return HorizontalSpec(
        column=column,
        assignments=assignments,
        default_site=default_site,
        declared_domain=declared_domain,
    )


def _parse_vertical(
    docs: list,
    table,
    topology: Topology,
    horizontal: HorizontalSpec | None,
    where: str,
) -> tuple[VerticalFragmentSpec, ...]:
    if not isinstance(docs, list) or not docs:
        raise PolicyError(f"{where}: vertical must be a non-empty array of fragment objects")
    specs: list[VerticalFragmentSpec] = []
    seen_names: set[str] = set()
    for i, doc in enumerate(docs):
        here = f"{where}.vertical[{i}]"
        if not isinstance(doc, dict):
            raise PolicyError(f"{here}: must be an object")
        _require_fields(doc, {"name", "columns", "sites", "primary_site", "shared_columns"}, here)
        for req in ("name", "columns"):
            if req not in doc:
                raise PolicyError(f"{here}: missing required field {req!r}")
        name = str(doc["name"]).upper()
        if name in seen_names:
            raise PolicyError(f"{here}: duplicate fragment name {name}")
        seen_names.add(name)

        raw_cols = doc["columns"]
        if not isinstance(raw_cols, list) or not raw_cols:
            raise PolicyError(f"{here}: columns must be a non-empty array")
        columns: list[str] = []
        for c in raw_cols:
            c = str(c).upper()
            if not table.has_column(c):
                raise PolicyError(f"{here}: table {table.name} has no column {c}")
            if c in columns:
                raise PolicyError(f"{here}: column {c} listed twice")
            columns.append(c)
        # The primary key always travels with a vertical fragment; prepend
        # any key column the designer left out.
        missing_pk = [c for c in table.primary_key if c not in columns]
        columns = missing_pk + columns

        shared = []
        for c in doc.get("shared_columns", []):
            c = str(c).upper()
            if c not in columns:
                raise PolicyError(f"{here}: shared column {c} is not in the fragment")
            if c in table.primary_key:
                raise PolicyError(f"{here}: primary key column {c} needs no sharing declaration")
            shared.append(c)

        split = horizontal is not None and horizontal.column in columns
        if split:
            expected_sites = list(horizontal.sites)
            if horizontal.default_site and horizontal.default_site not in expected_sites:
                expected_sites.append(horizontal.default_site)
            sites = doc.get("sites")
            if sites is None:
                sites = expected_sites
            else:
                sites = [str(s).upper() for s in sites]
                if sites != expected_sites:
                    raise PolicyError(
                        f"{here}: fragment contains the horizontal column "
                        f"{horizontal.column}; its sites must match the horizontal "
                        f"assignments {expected_sites} (or be omitted)"
                    )
            primary_site = str(doc.get("primary_site", sites[0])).upper()
        else:
            if "sites" not in doc:
                raise PolicyError(f"{here}: missing required field 'sites'")
            sites = [str(s).upper() for s in doc["sites"]]
            primary_site = str(doc.get("primary_site", sites[0] if sites else "")).upper()
        for s in sites:
            if s not in topology:
                raise PolicyError(f"{here}: unknown site {s}")
        if len(set(sites)) != len(sites):
            raise PolicyError(f"{here}: duplicate sites")

        specs.append(
            VerticalFragmentSpec(
                fragment_name=name,
                columns=tuple(columns),
                sites=tuple(sites),
                primary_site=primary_site,
                shared_columns=tuple(shared),
            )
        )
    return tuple(specs)


def parse_policy(document: dict, schema: Schema, topology: Topology) -> DistributionPolicy:
    """Resolve a policy document against an already validated schema/topology.

    Every table, column and site name is checked here; a returned policy
    contains no unresolved names. Defaults: refresh complete every 7 days.
    """
    if not isinstance(document, dict):
        raise PolicyError("policy document must be a JSON object")
    _require_fields(document, {"tables"}, "policy")
    entries = document.get("tables", [])
    if not isinstance(entries, list):
        raise PolicyError("policy.tables must be an array")

    policies: list[TablePolicy] = []
    for i, doc in enumerate(entries):
        where = f"policy.tables[{i}]"
        if not isinstance(doc, dict):
            raise PolicyError(f"{where}: must be an object")
        _require_fields(
            doc, {"table", "mode", "horizontal", "vertical", "refresh", "derive_from"}, where
        )
        for req in ("table", "mode"):
            if req not in doc:
                raise PolicyError(f"{where}: missing required field {req!r}")
        table_name = str(doc["table"]).upper()
        if table_name not in schema:
            raise PolicyError(f"{where}: unknown table {table_name}")
        table = schema.table(table_name)
        mode = str(doc["mode"])
        if mode not in MODES:
            raise PolicyError(f"{where}: unknown mode {mode!r}")

        refresh = RefreshPolicy()
        if "refresh" in doc and doc["refresh"] is not None:
            rdoc = doc["refresh"]
            if not isinstance(rdoc, dict):
                raise PolicyError(f"{where}.refresh: must be an object")
            _require_fields(rdoc, {"mode", "interval_days"}, f"{where}.refresh")
            refresh = RefreshPolicy(
                mode=str(rdoc.get("mode", "complete")),
                interval_days=int(rdoc.get("interval_days", DEFAULT_REFRESH_DAYS)),
            )

        horizontal = None
        if doc.get("horizontal") is not None:
            if mode not in ("horizontal", "hybrid"):
                raise PolicyError(f"{where}: horizontal spec present but mode is {mode}")
            horizontal = _parse_horizontal(doc["horizontal"], table, topology, f"{where}.horizontal")
        vertical: tuple[VerticalFragmentSpec, ...] = ()
        if doc.get("vertical") is not None:
            if mode not in ("vertical", "hybrid"):
                raise PolicyError(f"{where}: vertical specs present but mode is {mode}")
            vertical = _parse_vertical(doc["vertical"], table, topology, horizontal, where)

        derive_from = doc.get("derive_from")
        if derive_from is not None:
            derive_from = str(derive_from).upper()
            if derive_from not in schema:
                raise PolicyError(f"{where}: derive_from names unknown table {derive_from}")

        policies.append(
            TablePolicy(
                table=table_name,
                mode=mode,
                horizontal=horizontal,
                vertical=vertical,
                refresh=refresh,
                derive_from=derive_from,
            )
        )
    return DistributionPolicy(policies=tuple(policies))


def render_policy(policy: DistributionPolicy) -> dict:
    """Render back to the document form; ``parse_policy`` round-trips it."""
    tables = []
    for p in policy.policies:
        doc: dict = {"table": p.table, "mode": p.mode}
        if p.horizontal is not None:
            h: dict = {
                "column": p.horizontal.column,
                "assignments": {
                    site: [to_json(v) for v in values]
                    for site, values in p.horizontal.assignments
                },
            }
            if p.horizontal.default_site is not None:
                h["default_site"] = p.horizontal.default_site
            if p.horizontal.declared_domain is not None:
                h["domain"] = [to_json(v) for v in p.horizontal.declared_domain]
            doc["horizontal"] = h
        if p.vertical:
            doc["vertical"] = [
                {
                    "name": v.fragment_name,
                    "columns": list(v.columns),
                    "sites": list(v.sites),
                    "primary_site": v.primary_site,
                    "shared_columns": list(v.shared_columns),
                }
                for v in p.vertical
            ]
        doc["refresh"] = {"mode": p.refresh.mode, "interval_days": p.refresh.interval_days}
        if p.derive_from is not None:
            doc["derive_from"] = p.derive_from
        tables.append(doc)
    return {"tables": tables}


def load_policy(path: str, schema: Schema, topology: Topology) -> DistributionPolicy:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise PolicyError(f"{path}: not valid JSON: {exc}") from exc
    return parse_policy(doc, schema, topology)
