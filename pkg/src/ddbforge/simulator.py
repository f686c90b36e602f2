"""In-memory execution of fragmentation semantics.

This module is the executable ground truth behind validation and code
generation: it distributes concrete rows into fragments, routes inserts the
way the generated triggers do, checks cross-site integrity, and rebuilds the
original relations. Relations are multisets of tuples so duplicated data
survives round-trips bit-for-bit; rows are plain tuples aligned to column
order.

Inserts follow a single global serialization; concurrent-transaction
semantics are out of scope.
"""

from __future__ import annotations

import datetime as dt
import random
from collections import Counter
from dataclasses import dataclass, field

from .errors import DatasetError
from .fragmenter import DERIVED, Fragment, FragmentationPlan, IN_LIST
from .schema import DATE, NUMBER, Schema, Table
from .values import coerce, matches, to_json


@dataclass
class Relation:
    table: str
    columns: tuple[str, ...]
    rows: list[tuple] = field(default_factory=list)

    def project(self, columns: tuple[str, ...]) -> "Relation":
        idx = [self.columns.index(c) for c in columns]
        return Relation(self.table, columns, [tuple(r[i] for i in idx) for r in self.rows])


@dataclass
class Dataset:
    relations: dict[str, Relation] = field(default_factory=dict)


@dataclass
class SiteImage:
    """Per-site map of fragment id to its materialized relation."""

    sites: dict[str, dict[str, Relation]] = field(default_factory=dict)

    def relation(self, plan: FragmentationPlan, fragment_id: str) -> Relation:
        frag = plan.fragment(fragment_id)
        return self.sites[frag.site][fragment_id]


@dataclass(frozen=True)
class UnroutedRow:
    table: str
    row: tuple
    reason: str  # "no-matching-fragment" | "no-parent-fragment"


@dataclass
class DistributionResult:
    image: SiteImage
    unrouted: list[UnroutedRow] = field(default_factory=list)
    # Relations of tables the plan does not place; carried through untouched
    # so a distribute/reconstruct round-trip is total over the dataset.
    unplaced: dict[str, Relation] = field(default_factory=dict)


@dataclass(frozen=True)
class Divergence:
    group: str
    table: str
    primary_fragment: str
    replica_fragment: str
    site: str

    def describe(self) -> str:
        return (
            f"replica {self.replica_fragment} on site {self.site} differs from "
            f"primary copy {self.primary_fragment}"
        )


@dataclass
class ReconstructionOutcome:
    dataset: Dataset
    divergences: list[Divergence] = field(default_factory=list)


@dataclass(frozen=True)
class Placement:
    site: str
    fragment: str
    row: tuple


@dataclass(frozen=True)
class RoutingDecision:
    accepted: bool
    placements: tuple[Placement, ...] = ()
    reason: str | None = None  # "duplicate-pk" | "unroutable" | "fk-violation"
    detail: str = ""


@dataclass(frozen=True)
class Violation:
    kind: str  # "pk-duplicate" | "fk-dangling"
    table: str
    message: str


def multiset_equal(rows_a: list[tuple], rows_b: list[tuple]) -> bool:
    return Counter(rows_a) == Counter(rows_b)


def _empty_image(plan: FragmentationPlan) -> SiteImage:
    image = SiteImage({s: {} for s in plan.topology.site_names})
    for frag in plan.fragments:
        image.sites[frag.site][frag.id] = Relation(frag.table, frag.columns, [])
    return image


def _projector(table: Table, columns: tuple[str, ...]):
    idx = [table.column_names.index(c) for c in columns]
    return lambda row: tuple(row[i] for i in idx)


def _predicate_matches(frag: Fragment, value, family: tuple[Fragment, ...]) -> bool:
    pred = frag.predicate
    assert pred is not None
    if pred.kind == IN_LIST:
        return any(matches(value, v) for v in pred.values)
    # Catch-all mirrors the ELSE arm of the generated trigger: everything the
    # sibling value lists do not claim lands here, nulls included.
    for sibling in family:
        if sibling.id == frag.id or sibling.predicate is None:
            continue
        if sibling.predicate.kind == IN_LIST and any(
            matches(value, v) for v in sibling.predicate.values
        ):
            return False
    return True


def _pk_projector(table: Table):
    idx = [table.column_names.index(c) for c in table.primary_key]
    return lambda row: tuple(row[i] for i in idx)


def distribute(plan: FragmentationPlan, data: Dataset) -> DistributionResult:
    """Project/select every row into the fragments whose predicate it satisfies.

    Replicated fragments receive full copies; derived fragments receive the
    child rows whose foreign key lands in the co-located parent fragment.
    Rows of a horizontally fragmented table that no fragment accepts are
    reported, which can only happen when completeness was not provable.
    """
    image = _empty_image(plan)
    result = DistributionResult(image=image)
    # Parent key index for derived routing, filled as parents distribute;
    # fragmented_tables() yields parents before their derived children.
    partition_keys: dict[str, dict[str, set]] = {}

    for table_name in plan.fragmented_tables():
        table = plan.schema.table(table_name)
        relation = data.relations.get(table_name)
        rows = relation.rows if relation else []
        if relation and tuple(relation.columns) != table.column_names:
            raise DatasetError(
                f"{table_name}: dataset columns {relation.columns} do not match "
                f"schema columns {table.column_names}"
            )

        families = plan.split_families(table_name)
        groups = plan.projection_groups(table_name)
        partition = plan.partition_fragments(table_name)
        is_derived = bool(partition) and partition[0].kind == DERIVED
        projectors = {f.id: _projector(table, f.columns) for f in plan.fragments_of(table_name)}
        pk_of = _pk_projector(table)
        frag_keys: dict[str, set] = {f.id: set() for f in partition}

        if is_derived:
            edge = plan.derived_edge(table_name)
            assert edge is not None
            fk_cols, parent_name = edge
            fk_idx = [table.column_names.index(c) for c in fk_cols]
            parent_keys = partition_keys.get(parent_name, {})
            for row in rows:
                fk_value = tuple(row[i] for i in fk_idx)
                placed = False
                for frag in partition:
                    assert frag.parent_fragment is not None
                    if fk_value in parent_keys.get(frag.parent_fragment, set()):
                        image.sites[frag.site][frag.id].rows.append(projectors[frag.id](row))
                        frag_keys[frag.id].add(pk_of(row))
                        placed = True
                        break
                if not placed:
                    result.unrouted.append(UnroutedRow(table_name, row, "no-parent-fragment"))
        else:
            column_index = {}
            for family in families.values():
                col = family[0].predicate.column  # type: ignore[union-attr]
                column_index[family[0].group] = table.column_names.index(col)
            for row in rows:
                matched_partition = False
                for group, family in families.items():
                    value = row[column_index[group]]
                    for frag in family:
                        if _predicate_matches(frag, value, family):
                            image.sites[frag.site][frag.id].rows.append(projectors[frag.id](row))
                            if frag.id in frag_keys:
                                frag_keys[frag.id].add(pk_of(row))
                                matched_partition = True
                if families and not matched_partition:
                    result.unrouted.append(UnroutedRow(table_name, row, "no-matching-fragment"))
                for group_frags in groups.values():
                    for frag in group_frags:
                        image.sites[frag.site][frag.id].rows.append(projectors[frag.id](row))
                        if frag.id in frag_keys:
                            frag_keys[frag.id].add(pk_of(row))
        partition_keys[table_name] = frag_keys

    placed_tables = set(plan.fragmented_tables())
    for name, relation in data.relations.items():
        if name not in placed_tables:
            result.unplaced[name] = Relation(name, relation.columns, list(relation.rows))
    return result


def _check_group_divergence(
    plan: FragmentationPlan, image: SiteImage, group_frags: tuple[Fragment, ...]
) -> tuple[Relation, list[Divergence]]:
    primary = next((f for f in group_frags if f.primary_copy), group_frags[0])
    primary_rel = image.sites[primary.site][primary.id]
    divergences = []
    for frag in group_frags:
        if frag.id == primary.id:
            continue
        replica_rel = image.sites[frag.site][frag.id]
        if not multiset_equal(replica_rel.rows, primary_rel.rows):
            divergences.append(
                Divergence(
                    group=frag.group,
                    table=frag.table,
                    primary_fragment=primary.id,
                    replica_fragment=frag.id,
                    site=frag.site,
                )
            )
    return primary_rel, divergences


def reconstruct(
    image: SiteImage | DistributionResult, plan: FragmentationPlan
) -> ReconstructionOutcome:
    """Rebuild the source relations from a site image.

    Horizontal fragments recombine by multiset union; replicated fragments
    contribute their primary copy (divergent replicas are reported, never
    silently merged away); vertical fragments recombine by key join. Output
    column order matches the source table.
    """
    unplaced: dict[str, Relation] = {}
    if isinstance(image, DistributionResult):
        unplaced = image.unplaced
        image = image.image

    outcome = ReconstructionOutcome(dataset=Dataset())
    for table_name in plan.fragmented_tables():
        table = plan.schema.table(table_name)
        groups = plan.projection_groups(table_name)
        partition = plan.partition_fragments(table_name)

        base_columns: tuple[str, ...] | None = None
        base_rows: list[tuple] = []
        if partition:
            base_columns = partition[0].columns
            for frag in partition:
                base_rows.extend(image.sites[frag.site][frag.id].rows)

        group_rels: list[Relation] = []
        for group_frags in groups.values():
            rel, divergences = _check_group_divergence(plan, image, group_frags)
            outcome.divergences.extend(divergences)
            group_rels.append(rel)

        if base_columns is None:
            if not group_rels:
                continue
            first = group_rels[0]
            base_columns, base_rows = first.columns, list(first.rows)
            group_rels = group_rels[1:]

        if group_rels:
            pk = table.primary_key
            pk_idx = [base_columns.index(c) for c in pk]
            merged: list[dict] = []
            for row in base_rows:
                merged.append(dict(zip(base_columns, row)))
            by_pk = {tuple(row[i] for i in pk_idx): rec for row, rec in zip(base_rows, merged)}
            for rel in group_rels:
                rel_pk_idx = [rel.columns.index(c) for c in pk]
                for row in rel.rows:
                    key = tuple(row[i] for i in rel_pk_idx)
                    rec = by_pk.get(key)
                    if rec is None:
                        continue
                    for col, value in zip(rel.columns, row):
                        rec.setdefault(col, value)
            rows = [tuple(rec.get(c) for c in table.column_names) for rec in merged]
        else:
            order = [base_columns.index(c) for c in table.column_names]
            rows = [tuple(row[i] for i in order) for row in base_rows]
        outcome.dataset.relations[table_name] = Relation(table_name, table.column_names, rows)

    for name, relation in unplaced.items():
        outcome.dataset.relations[name] = Relation(name, relation.columns, list(relation.rows))
    return outcome


def _global_keys(plan: FragmentationPlan, image: SiteImage, table_name: str) -> set:
    """All primary key tuples of a placed table, across its fragments."""
    table = plan.schema.table(table_name)
    partition = plan.partition_fragments(table_name)
    keys: set = set()
    if partition:
        for frag in partition:
            rel = image.sites[frag.site][frag.id]
            idx = [frag.columns.index(c) for c in table.primary_key]
            keys.update(tuple(r[i] for i in idx) for r in rel.rows)
        return keys
    for group_frags in plan.projection_groups(table_name).values():
        primary = next((f for f in group_frags if f.primary_copy), group_frags[0])
        rel = image.sites[primary.site][primary.id]
        idx = [primary.columns.index(c) for c in table.primary_key]
        keys.update(tuple(r[i] for i in idx) for r in rel.rows)
        return keys
    return keys


def route_insert(
    plan: FragmentationPlan, image: SiteImage, table: str, row: tuple
) -> RoutingDecision:
    """Route one insert the way the generated trigger does.

    Checks run in trigger order: global key uniqueness first, then foreign
    keys into placed parents, then predicate routing. An accepted insert
    returns every placement the row generates, replicas included.
    """
    schema_table = plan.schema.table(table)
    if len(row) != len(schema_table.column_names):
        raise DatasetError(
            f"{table}: row arity {len(row)} does not match column count "
            f"{len(schema_table.column_names)}"
        )
    if not plan.fragments_of(table):
        raise DatasetError(f"{table} is not placed by this plan; nothing to route")

    pk_of = _pk_projector(schema_table)
    pk_value = pk_of(row)
    if pk_value in _global_keys(plan, image, table):
        return RoutingDecision(
            accepted=False,
            reason="duplicate-pk",
            detail=f"primary key {tuple(to_json(v) for v in pk_value)} already exists in {table}",
        )

    placed = set(plan.fragmented_tables())
    for fk in schema_table.foreign_keys:
        if fk.ref_table not in placed:
            continue
        idx = [schema_table.column_names.index(c) for c in fk.columns]
        fk_value = tuple(row[i] for i in idx)
        if any(v is None for v in fk_value):
            continue
        if fk_value not in _global_keys(plan, image, fk.ref_table):
            return RoutingDecision(
                accepted=False,
                reason="fk-violation",
                detail=(
                    f"{fk.name}: value {tuple(to_json(v) for v in fk_value)} "
                    f"not found in any fragment of {fk.ref_table}"
                ),
            )

    placements: list[Placement] = []
    partition = plan.partition_fragments(table)
    is_derived = bool(partition) and partition[0].kind == DERIVED
    projectors = {f.id: _projector(schema_table, f.columns) for f in plan.fragments_of(table)}

    if is_derived:
        edge = plan.derived_edge(table)
        assert edge is not None
        fk_cols, parent_name = edge
        idx = [schema_table.column_names.index(c) for c in fk_cols]
        fk_value = tuple(row[i] for i in idx)
        parent_table = plan.schema.table(parent_name)
        target = None
        for frag in partition:
            assert frag.parent_fragment is not None
            parent_frag = plan.fragment(frag.parent_fragment)
            rel = image.sites[parent_frag.site][parent_frag.id]
            pidx = [parent_frag.columns.index(c) for c in parent_table.primary_key]
            if any(tuple(r[i] for i in pidx) == fk_value for r in rel.rows):
                target = frag
                break
        if target is None:
            return RoutingDecision(
                accepted=False,
                reason="fk-violation",
                detail=(
                    f"no fragment of {parent_name} holds key "
                    f"{tuple(to_json(v) for v in fk_value)}; cannot co-locate"
                ),
            )
        placements.append(Placement(target.site, target.id, projectors[target.id](row)))
    else:
        families = plan.split_families(table)
        matched_partition = not families
        partition_group = partition[0].group if partition else None
        for family in families.values():
            col_idx = schema_table.column_names.index(family[0].predicate.column)  # type: ignore[union-attr]
            value = row[col_idx]
            for frag in family:
                if _predicate_matches(frag, value, family):
                    placements.append(Placement(frag.site, frag.id, projectors[frag.id](row)))
                    if frag.group == partition_group:
                        matched_partition = True
        if families and not matched_partition:
            return RoutingDecision(
                accepted=False,
                reason="unroutable",
                detail=f"no fragment of {table} accepts this row",
            )
        for group_frags in plan.projection_groups(table).values():
            for frag in group_frags:
                placements.append(Placement(frag.site, frag.id, projectors[frag.id](row)))

    return RoutingDecision(accepted=True, placements=tuple(placements))


def apply_routing(image: SiteImage, decision: RoutingDecision) -> None:
    """Materialize an accepted routing decision into the image."""
    for placement in decision.placements:
        image.sites[placement.site][placement.fragment].rows.append(placement.row)


def check_global_integrity(image: SiteImage, plan: FragmentationPlan) -> list[Violation]:
    """Cross-fragment key duplicates and cross-site dangling references.

    Empty exactly when centralized key checks on the reconstructed dataset
    are empty.
    """
    violations: list[Violation] = []
    for table_name in plan.fragmented_tables():
        table = plan.schema.table(table_name)
        partition = plan.partition_fragments(table_name)
        seen: dict[tuple, str] = {}
        for frag in partition:
            rel = image.sites[frag.site][frag.id]
            idx = [frag.columns.index(c) for c in table.primary_key]
            for row in rel.rows:
                key = tuple(row[i] for i in idx)
                owner = seen.get(key)
                if owner is not None:
                    violations.append(
                        Violation(
                            "pk-duplicate",
                            table_name,
                            f"key {tuple(to_json(v) for v in key)} appears in both "
                            f"{owner} and {frag.id}",
                        )
                    )
                else:
                    seen[key] = frag.id
        if not partition:
            for group_frags in plan.projection_groups(table_name).values():
                primary = next((f for f in group_frags if f.primary_copy), group_frags[0])
                rel = image.sites[primary.site][primary.id]
                idx = [primary.columns.index(c) for c in table.primary_key]
                group_seen: set = set()
                for row in rel.rows:
                    key = tuple(row[i] for i in idx)
                    if key in group_seen:
                        violations.append(
                            Violation(
                                "pk-duplicate",
                                table_name,
                                f"key {tuple(to_json(v) for v in key)} appears twice in {primary.id}",
                            )
                        )
                    group_seen.add(key)
                break

    placed = set(plan.fragmented_tables())
    parent_keys: dict[str, set] = {}
    for table_name in plan.fragmented_tables():
        table = plan.schema.table(table_name)
        for fk in table.foreign_keys:
            if fk.ref_table not in placed:
                continue
            if fk.ref_table not in parent_keys:
                parent_keys[fk.ref_table] = _global_keys(plan, image, fk.ref_table)
            keys = parent_keys[fk.ref_table]
            reported: set = set()
            for frag in plan.fragments_of(table_name):
                if not all(c in frag.columns for c in fk.columns):
                    continue
                if not frag.primary_copy:
                    continue
                rel = image.sites[frag.site][frag.id]
                idx = [frag.columns.index(c) for c in fk.columns]
                for row in rel.rows:
                    value = tuple(row[i] for i in idx)
                    if any(v is None for v in value) or value in keys or value in reported:
                        continue
                    reported.add(value)
                    violations.append(
                        Violation(
                            "fk-dangling",
                            table_name,
                            f"{fk.name}: value {tuple(to_json(v) for v in value)} on "
                            f"{frag.id} resolves to no row of {fk.ref_table}",
                        )
                    )
    return violations


def centralized_integrity(dataset: Dataset, schema: Schema) -> list[Violation]:
    """Key checks a single centralized database would run; oracle twin of
    :func:`check_global_integrity`."""
    violations: list[Violation] = []
    for table in schema.tables:
        rel = dataset.relations.get(table.name)
        if rel is None or not table.primary_key:
            continue
        idx = [rel.columns.index(c) for c in table.primary_key]
        seen: set = set()
        for row in rel.rows:
            key = tuple(row[i] for i in idx)
            if key in seen:
                violations.append(
                    Violation(
                        "pk-duplicate",
                        table.name,
                        f"key {tuple(to_json(v) for v in key)} appears twice",
                    )
                )
            seen.add(key)
    for table in schema.tables:
        rel = dataset.relations.get(table.name)
        if rel is None:
            continue
        for fk in table.foreign_keys:
            parent_rel = dataset.relations.get(fk.ref_table)
            if parent_rel is None or fk.ref_table not in schema:
                continue
            parent = schema.table(fk.ref_table)
            pidx = [parent_rel.columns.index(c) for c in parent.primary_key]
            keys = {tuple(r[i] for i in pidx) for r in parent_rel.rows}
            idx = [rel.columns.index(c) for c in fk.columns]
            reported: set = set()
            for row in rel.rows:
                value = tuple(row[i] for i in idx)
                if any(v is None for v in value) or value in keys or value in reported:
                    continue
                reported.add(value)
                violations.append(
                    Violation(
                        "fk-dangling",
                        table.name,
                        f"{fk.name}: value {tuple(to_json(v) for v in value)} resolves "
                        f"to no row of {fk.ref_table}",
                    )
                )
    return violations


def load_dataset(doc: dict, schema: Schema) -> Dataset:
    """Load sample data from its JSON form (map table -> array of row arrays)."""
    if not isinstance(doc, dict):
        raise DatasetError("dataset document must be an object mapping table to rows")
    dataset = Dataset()
    for table_name, rows in doc.items():
        table_name = str(table_name).upper()
        if table_name not in schema:
            raise DatasetError(f"dataset references unknown table {table_name}")
        table = schema.table(table_name)
        if not isinstance(rows, list):
            raise DatasetError(f"{table_name}: rows must be an array of arrays")
        typed_rows: list[tuple] = []
        for i, raw in enumerate(rows):
            if not isinstance(raw, list) or len(raw) != len(table.columns):
                raise DatasetError(
                    f"{table_name}[{i}]: expected {len(table.columns)} values"
                )
            typed_rows.append(
                tuple(
                    coerce(col.ctype, value, f"{table_name}[{i}].{col.name}")
                    for col, value in zip(table.columns, raw)
                )
            )
        pk_of = _pk_projector(table)
        seen: set = set()
        for i, row in enumerate(typed_rows):
            key = pk_of(row)
            if table.primary_key and key in seen:
                raise DatasetError(
                    f"{table_name}: duplicate primary key {tuple(to_json(v) for v in key)}"
                )
            seen.add(key)
        dataset.relations[table_name] = Relation(table_name, table.column_names, typed_rows)
    return dataset


def dataset_to_json(dataset: Dataset) -> dict:
    return {
        name: [[to_json(v) for v in row] for row in rel.rows]
        for name, rel in dataset.relations.items()
    }


_WORDS = (
    "alpha", "bravo", "cedar", "delta", "ember", "fjord", "gamma", "harbor",
    "iris", "juno", "koral", "lumen", "mesa", "norte", "opal", "pique",
)


def generate_dataset(
    schema: Schema,
    plan: FragmentationPlan | None = None,
    *,
    seed: int,
    max_rows: int = 50,
) -> Dataset:
    """Seeded random dataset that conforms to the schema (unique keys,
    resolving foreign keys) and routes cleanly under the given plan."""
    rng = random.Random(seed)
    dataset = Dataset()

    # Parents before children so foreign keys can sample existing rows.
    ordered: list[Table] = []
    remaining = list(schema.tables)
    while remaining:
        progressed = False
        for table in list(remaining):
            deps = {fk.ref_table for fk in table.foreign_keys if fk.ref_table != table.name}
            if all(d in {t.name for t in ordered} or d not in schema for d in deps):
                ordered.append(table)
                remaining.remove(table)
                progressed = True
        if not progressed:  # FK cycle: emit the rest in declaration order
            ordered.extend(remaining)
            break

    routing_values: dict[tuple[str, str], list] = {}
    if plan is not None:
        for tp in plan.policy.policies:
            if tp.horizontal is None:
                continue
            pool: list = []
            for _, values in tp.horizontal.assignments:
                pool.extend(values)
            if tp.horizontal.default_site is not None and tp.horizontal.declared_domain:
                pool.extend(tp.horizontal.declared_domain)
            routing_values[(tp.table, tp.horizontal.column)] = pool

    def random_value(table: Table, column_name: str):
        ctype = table.column(column_name).ctype
        pinned = routing_values.get((table.name, column_name))
        if pinned:
            return rng.choice(pinned)
        if ctype.kind == NUMBER:
            return rng.randint(0, 99999)
        if ctype.kind == DATE:
            return dt.date(2020, 1, 1) + dt.timedelta(days=rng.randint(0, 2000))
        word = f"{rng.choice(_WORDS)}_{rng.randint(0, 9999)}"
        return word[: ctype.length or len(word)]

    for table in ordered:
        n_rows = rng.randint(1, max_rows)
        fk_sources: dict[str, list[tuple]] = {}
        for fk in table.foreign_keys:
            parent_rel = dataset.relations.get(fk.ref_table)
            if parent_rel is None or not parent_rel.rows:
                continue
            parent = schema.table(fk.ref_table)
            pidx = [parent_rel.columns.index(c) for c in parent.primary_key]
            fk_sources[fk.name] = [tuple(r[i] for i in pidx) for r in parent_rel.rows]

        pk_of = _pk_projector(table)
        seen_keys: set = set()
        rows: list[tuple] = []
        for _ in range(n_rows):
            for _attempt in range(30):
                record = {c: random_value(table, c) for c in table.column_names}
                for col in table.columns:
                    if (
                        col.nullable
                        and col.name not in table.primary_key
                        and (table.name, col.name) not in routing_values
                        and rng.random() < 0.08
                    ):
                        record[col.name] = None
                for fk in table.foreign_keys:
                    source = fk_sources.get(fk.name)
                    if not source:
                        continue
                    chosen = rng.choice(source)
                    for col, value in zip(fk.columns, chosen):
                        record[col] = value
                row = tuple(record[c] for c in table.column_names)
                key = pk_of(row)
                if not table.primary_key or key not in seen_keys:
                    seen_keys.add(key)
                    rows.append(row)
                    break
        dataset.relations[table.name] = Relation(table.name, table.column_names, rows)
    return dataset
