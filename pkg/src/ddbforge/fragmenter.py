"""Resolve schema + topology + policy into a concrete fragmentation plan.

Planning is a pure function: identical inputs produce a structurally
identical plan, with fragments ordered by policy entry first and topology
site order second. Derived fragmentation (co-locating child tables with a
fragmented parent along a foreign key) is a separate pass so callers can
inspect the explicit plan before the automatic one.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .errors import AmbiguousDerivationError, PlanError
from .policy import DistributionPolicy, TablePolicy
from .schema import Schema, schema_from_json, schema_to_json
from .topology import Topology, topology_from_json, topology_to_json
from .values import coerce, to_json

IN_LIST = "in_list"
CATCH_ALL = "catch_all"

HORIZONTAL = "horizontal"
VERTICAL = "vertical"
HYBRID_LEAF = "hybrid_leaf"
DERIVED = "derived"
FULL_REPLICA = "full_replica"


@dataclass(frozen=True)
class Predicate:
    column: str
    kind: str  # "in_list" | "catch_all"
    values: tuple = ()

    def __post_init__(self) -> None:
        if self.kind == IN_LIST:
            if not self.values:
                raise PlanError("in_list predicate needs at least one value")
            if len(set(self.values)) != len(self.values):
                raise PlanError("in_list predicate values must be duplicate-free")
        elif self.kind == CATCH_ALL:
            if self.values:
                raise PlanError("catch_all predicate carries no values")
        else:
            raise PlanError(f"unknown predicate kind {self.kind!r}")


@dataclass(frozen=True)
class Fragment:
    id: str
    table: str
    kind: str
    columns: tuple[str, ...]
    site: str
    predicate: Predicate | None = None
    primary_copy: bool = True
    parent_fragment: str | None = None
    # Fragments carrying the same projection across sites (replicas) share a
    # group; for row-partitioned fragments the group is the split family.
    group: str = ""

    def selects_rows(self) -> bool:
        """True when this fragment holds a predicate-selected row subset."""
        return self.predicate is not None


@dataclass(frozen=True)
class FragmentationPlan:
    schema: Schema
    topology: Topology
    policy: DistributionPolicy
    fragments: tuple[Fragment, ...] = ()
    # child table -> (fk columns, parent table), filled by derive_fragments
    derived_edges: tuple[tuple[str, tuple[tuple[str, ...], str]], ...] = ()
    _by_id: dict[str, Fragment] = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self) -> None:
        by_id: dict[str, Fragment] = {}
        for frag in self.fragments:
            if frag.id in by_id:
                raise PlanError(f"duplicate fragment id {frag.id}")
            if frag.id in self.schema:
                raise PlanError(
                    f"fragment id {frag.id} collides with an existing table name; "
                    f"generated objects must not shadow source tables"
                )
            if frag.site not in self.topology:
                raise PlanError(f"fragment {frag.id}: unknown site {frag.site}")
            if frag.table not in self.schema:
                raise PlanError(f"fragment {frag.id}: unknown table {frag.table}")
            # Key containment is the validator's structural check, not a
            # construction error: a broken fragment must surface in the
            # report the designer sees.
            by_id[frag.id] = frag
        object.__setattr__(self, "_by_id", by_id)

    def fragment(self, fragment_id: str) -> Fragment:
        try:
            return self._by_id[fragment_id]
        except KeyError:
            raise KeyError(f"plan has no fragment {fragment_id}") from None

    def fragments_of(self, table: str) -> tuple[Fragment, ...]:
        return tuple(f for f in self.fragments if f.table == table)

    def fragmented_tables(self) -> tuple[str, ...]:
        seen: list[str] = []
        for f in self.fragments:
            if f.table not in seen:
                seen.append(f.table)
        return tuple(seen)

    def partition_fragments(self, table: str) -> tuple[Fragment, ...]:
        """Fragments that partition the table's rows (selection or derived).

        For hybrid tables with several split families, only the first family
        is returned; all families share the same row partition.
        """
        frags = self.fragments_of(table)
        predicated = [f for f in frags if f.selects_rows()]
        if predicated:
            first_group = predicated[0].group
            return tuple(f for f in predicated if f.group == first_group)
        return tuple(f for f in frags if f.kind == DERIVED)

    def projection_groups(self, table: str) -> dict[str, tuple[Fragment, ...]]:
        """Replica groups holding full-row projections (no predicate)."""
        groups: dict[str, list[Fragment]] = {}
        for f in self.fragments_of(table):
            if not f.selects_rows() and f.kind != DERIVED:
                groups.setdefault(f.group, []).append(f)
        return {g: tuple(fs) for g, fs in groups.items()}

    def split_families(self, table: str) -> dict[str, tuple[Fragment, ...]]:
        """Predicate-bearing fragment families, keyed by group."""
        groups: dict[str, list[Fragment]] = {}
        for f in self.fragments_of(table):
            if f.selects_rows():
                groups.setdefault(f.group, []).append(f)
        return {g: tuple(fs) for g, fs in groups.items()}

    def derived_edge(self, table: str) -> tuple[tuple[str, ...], str] | None:
        for child, edge in self.derived_edges:
            if child == table:
                return edge
        return None

    def table_trees(self) -> dict[str, list[dict]]:
        """Per-table display trees: fragment nodes with site and column leaves."""
        trees: dict[str, list[dict]] = {}
        for frag in self.fragments:
            trees.setdefault(frag.table, []).append(
                {
                    "id": frag.id,
                    "site": frag.site,
                    "kind": frag.kind,
                    "columns": list(frag.columns),
                    "primary_copy": frag.primary_copy,
                    "primary_key": list(self.schema.table(frag.table).primary_key),
                }
            )
        return trees


def _fragment_id(base: str, site: str) -> str:
    return f"{base}_{site}".upper()


def _horizontal_fragments(
    table,
    tp: TablePolicy,
    topology: Topology,
    *,
    kind: str,
    columns: tuple[str, ...],
    group: str,
    id_base: str,
) -> list[Fragment]:
    spec = tp.horizontal
    assert spec is not None
    if not table.has_column(spec.column):
        raise PlanError(f"table {table.name}: horizontal column {spec.column} not found")
    assigned_sites = spec.sites
    for site in assigned_sites:
        if site not in topology:
            raise PlanError(f"table {table.name}: assignment to unknown site {site}")
    out: list[Fragment] = []
    for site, values in spec.assignments:
        if spec.default_site == site:
            # The catch-all lives on a site that also has explicit values:
            # that site's fragment absorbs them and matches everything the
            # sibling lists do not claim.
            predicate = Predicate(column=spec.column, kind=CATCH_ALL)
        else:
            predicate = Predicate(column=spec.column, kind=IN_LIST, values=tuple(values))
        out.append(
            Fragment(
                id=_fragment_id(id_base, site),
                table=table.name,
                kind=kind,
                columns=columns,
                site=site,
                predicate=predicate,
                primary_copy=True,
                group=group,
            )
        )
    if spec.default_site is not None and spec.default_site not in assigned_sites:
        out.append(
            Fragment(
                id=_fragment_id(id_base, spec.default_site),
                table=table.name,
                kind=kind,
                columns=columns,
                site=spec.default_site,
                predicate=Predicate(column=spec.column, kind=CATCH_ALL),
                primary_copy=True,
                group=group,
            )
        )
    return out


def _replica_fragments(
    table,
    spec,
    topology: Topology,
    *,
    kind: str,
) -> list[Fragment]:
    ordered_sites = [s for s in topology.site_names if s in spec.sites]
    return [
        Fragment(
            id=_fragment_id(spec.fragment_name, site),
            table=table.name,
            kind=kind,
            columns=tuple(spec.columns),
            site=site,
            predicate=None,
            primary_copy=(site == spec.primary_site),
            group=spec.fragment_name,
        )
        for site in ordered_sites
    ]


def build_plan(schema: Schema, topology: Topology, policy: DistributionPolicy) -> FragmentationPlan:
    """Expand the policy into concrete fragments (no derivation yet)."""
    fragments: list[Fragment] = []
    for tp in policy.policies:
        if tp.mode == "none":
            continue
        table = schema.table(tp.table)
        if not table.primary_key:
            raise PlanError(f"table {tp.table} has no primary key and cannot be fragmented")
        full_columns = table.column_names

        if tp.mode == "horizontal":
            fragments.extend(
                _horizontal_fragments(
                    table,
                    tp,
                    topology,
                    kind=HORIZONTAL,
                    columns=full_columns,
                    group=table.name,
                    id_base=table.name,
                )
            )
        elif tp.mode == "vertical":
            for spec in tp.vertical:
                fragments.extend(_replica_fragments(table, spec, topology, kind=VERTICAL))
        elif tp.mode == "hybrid":
            assert tp.horizontal is not None
            for spec in tp.vertical:
                if tp.horizontal.column in spec.columns:
                    fragments.extend(
                        _horizontal_fragments(
                            table,
                            tp,
                            topology,
                            kind=HYBRID_LEAF,
                            columns=tuple(spec.columns),
                            group=spec.fragment_name,
                            id_base=spec.fragment_name,
                        )
                    )
                else:
                    fragments.extend(_replica_fragments(table, spec, topology, kind=VERTICAL))
        elif tp.mode == "replicate_full":
            primary = topology.site_names[0]
            fragments.extend(
                Fragment(
                    id=_fragment_id(table.name, site),
                    table=table.name,
                    kind=FULL_REPLICA,
                    columns=full_columns,
                    site=site,
                    predicate=None,
                    primary_copy=(site == primary),
                    group=table.name,
                )
                for site in topology.site_names
            )
    return FragmentationPlan(
        schema=schema, topology=topology, policy=policy, fragments=tuple(fragments)
    )


def derive_fragments(plan: FragmentationPlan) -> FragmentationPlan:
    """Co-locate non-fragmented child tables with their fragmented parents.

    For every table without fragments that has a foreign key into a table
    with a row partition, one derived fragment is added per parent partition
    fragment, on the parent fragment's site, holding the child rows whose
    key points into that fragment. Runs to a fixpoint so chains of children
    are handled; a table with several fragmented parents is refused unless
    its policy names a preference via ``derive_from``.
    """
    schema = plan.schema
    fragments = list(plan.fragments)
    derived_edges = list(plan.derived_edges)
    fragmented = {f.table for f in fragments}

    for _ in range(len(schema.tables) + 1):
        changed = False
        for table in schema.tables:
            if table.name in fragmented:
                continue
            candidates = [
                fk for fk in table.foreign_keys if fk.ref_table in fragmented
            ]
            if not candidates:
                continue
            tp = plan.policy.for_table(table.name)
            preference = tp.derive_from if tp else None
            if preference is not None:
                chosen = [fk for fk in candidates if fk.ref_table == preference]
                if not chosen:
                    raise PlanError(
                        f"table {table.name}: derive_from names {preference}, "
                        f"which is not a fragmented parent"
                    )
                if len(chosen) > 1:
                    raise AmbiguousDerivationError(table.name, [fk.ref_table for fk in chosen])
                fk = chosen[0]
            elif len(candidates) > 1:
                raise AmbiguousDerivationError(
                    table.name, [fk.ref_table for fk in candidates]
                )
            else:
                fk = candidates[0]

            parent = schema.table(fk.ref_table)
            if tuple(fk.ref_columns) != tuple(parent.primary_key):
                raise PlanError(
                    f"table {table.name}: foreign key {fk.name} does not target the "
                    f"full primary key of {parent.name}; cannot derive"
                )
            parent_parts = [
                f for f in fragments if f.table == parent.name and (f.selects_rows() or f.kind == DERIVED)
            ]
            if parent_parts and any(f.selects_rows() for f in parent_parts):
                first_group = next(f.group for f in parent_parts if f.selects_rows())
                parent_parts = [f for f in parent_parts if f.group == first_group]
            if not parent_parts:
                # Parent is only replicated; child rows have no single home to
                # follow, so derivation does not apply.
                continue
            for pf in parent_parts:
                fragments.append(
                    Fragment(
                        id=_fragment_id(table.name, pf.site),
                        table=table.name,
                        kind=DERIVED,
                        columns=table.column_names,
                        site=pf.site,
                        predicate=None,
                        primary_copy=True,
                        parent_fragment=pf.id,
                        group=table.name,
                    )
                )
            derived_edges.append((table.name, (tuple(fk.columns), parent.name)))
            fragmented.add(table.name)
            changed = True
        if not changed:
            break
    else:
        raise PlanError("derived fragmentation did not reach a fixpoint; cyclic derivation")

    return replace(plan, fragments=tuple(fragments), derived_edges=tuple(derived_edges))


def plan_tables(schema: Schema, topology: Topology, policy: DistributionPolicy) -> FragmentationPlan:
    """Full planning pipeline: explicit expansion plus derived fragmentation."""
    return derive_fragments(build_plan(schema, topology, policy))


def predicate_to_json(pred: Predicate | None) -> dict | None:
    if pred is None:
        return None
    return {
        "column": pred.column,
        "kind": pred.kind,
        "values": [to_json(v) for v in pred.values],
    }


def plan_to_json(plan: FragmentationPlan) -> dict:
    """Canonical JSON form of a plan (inspection and codegen handoff)."""
    from .policy import render_policy

    return {
        "schema": schema_to_json(plan.schema),
        "topology": topology_to_json(plan.topology),
        "policy": render_policy(plan.policy),
        "fragments": [
            {
                "id": f.id,
                "table": f.table,
                "kind": f.kind,
                "columns": list(f.columns),
                "site": f.site,
                "predicate": predicate_to_json(f.predicate),
                "primary_copy": f.primary_copy,
                "parent_fragment": f.parent_fragment,
                "group": f.group,
            }
            for f in plan.fragments
        ],
        "derived_edges": [
            {"table": child, "fk_columns": list(fk_cols), "parent": parent}
            for child, (fk_cols, parent) in plan.derived_edges
        ],
        "table_trees": plan.table_trees(),
    }


def plan_from_json(doc: dict) -> FragmentationPlan:
    from .policy import parse_policy

    schema = schema_from_json(doc["schema"])
    topology = topology_from_json(doc["topology"])
    policy = parse_policy(doc.get("policy", {"tables": []}), schema, topology)
    fragments = []
    for fdoc in doc["fragments"]:
        pred = None
        if fdoc.get("predicate") is not None:
            pdoc = fdoc["predicate"]
            ctype = schema.table(fdoc["table"]).column(pdoc["column"]).ctype
            pred = Predicate(
                column=pdoc["column"],
                kind=pdoc["kind"],
                values=tuple(coerce(ctype, v, "plan.predicate") for v in pdoc.get("values", ())),
            )
        fragments.append(
            Fragment(
                id=fdoc["id"],
                table=fdoc["table"],
                kind=fdoc["kind"],
                columns=tuple(fdoc["columns"]),
                site=fdoc["site"],
                predicate=pred,
                primary_copy=fdoc.get("primary_copy", True),
                parent_fragment=fdoc.get("parent_fragment"),
                group=fdoc.get("group", ""),
            )
        )
    derived_edges = tuple(
        (e["table"], (tuple(e["fk_columns"]), e["parent"]))
        for e in doc.get("derived_edges", ())
    )
    return FragmentationPlan(
        schema=schema,
        topology=topology,
        policy=policy,
        fragments=tuple(fragments),
        derived_edges=derived_edges,
    )
