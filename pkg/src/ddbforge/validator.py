"""Fragmentation correctness checks: reconstruction, completeness, disjointness.

Per fragmented table the report carries one verdict per criterion, in the
display order reconstruction, completeness, disjointness; structural checks
(fragments missing their table's primary key) come last. Horizontal
completeness over an open value domain is undecidable, so it gets a distinct
``indeterminate`` level instead of silently passing: reaching a fully
``valid`` report requires either a catch-all site or a declared domain.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .fragmenter import CATCH_ALL, DERIVED, Fragment, FragmentationPlan, IN_LIST
from .schema import Schema
from .values import to_json

RECONSTRUCTION = "reconstruction"
COMPLETENESS = "completeness"
DISJOINTNESS = "disjointness"
STRUCTURAL = "structural"

PASS = "pass"
WARNING = "warning"
ERROR = "error"
INDETERMINATE = "indeterminate"

VALID = "valid"
VALID_WITH_WARNINGS = "valid_with_warnings"
INVALID = "invalid"

_LEVEL_RANK = {PASS: 0, INDETERMINATE: 1, WARNING: 2, ERROR: 3}


@dataclass(frozen=True)
class Verdict:
    criterion: str
    level: str
    table: str
    messages: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.level in (ERROR, WARNING) and not self.messages:
            raise ValueError(f"{self.level} verdict needs at least one message")


@dataclass(frozen=True)
class ValidationReport:
    verdicts: tuple[Verdict, ...]
    overall: str

    def for_table(self, table: str) -> tuple[Verdict, ...]:
        return tuple(v for v in self.verdicts if v.table == table)


def check_fragment_pk(fragment: Fragment, schema: Schema) -> str | None:
    """Error message when a fragment does not carry its table's primary key."""
    table = schema.table(fragment.table)
    missing = [c for c in table.primary_key if c not in fragment.columns]
    if missing:
        return (
            f"fragment {fragment.id} is missing primary key column(s) "
            f"{', '.join(missing)} of table {fragment.table}"
        )
    return None


def _worst(levels: list[str]) -> str:
    return max(levels, key=lambda lv: _LEVEL_RANK[lv]) if levels else PASS


def _horizontal_verdicts(plan: FragmentationPlan, table: str, family: tuple[Fragment, ...]):
    """Disjointness/completeness/reconstruction for one predicate family."""
    in_lists = [f for f in family if f.predicate and f.predicate.kind == IN_LIST]
    has_catch_all = any(f.predicate and f.predicate.kind == CATCH_ALL for f in family)
    column = family[0].predicate.column if family[0].predicate else "?"

    dis_messages: list[str] = []
    for i, fa in enumerate(in_lists):
        for fb in in_lists[i + 1 :]:
            overlap = [v for v in fa.predicate.values if v in fb.predicate.values]
            if overlap:
                rendered = ", ".join(str(to_json(v)) for v in overlap)
                dis_messages.append(
                    f"fragments {fa.id} and {fb.id} both claim value(s) {rendered} "
                    f"of column {column}"
                )
    dis_level = ERROR if dis_messages else PASS
    disjointness = Verdict(DISJOINTNESS, dis_level, table, tuple(dis_messages))

    spec = None
    tp = plan.policy.for_table(table)
    if tp is not None:
        spec = tp.horizontal
    covered: set = set()
    for f in in_lists:
        covered.update(f.predicate.values)
    comp_messages: list[str] = []
    if has_catch_all:
        comp_level = PASS
        comp_messages.append(f"catch-all fragment accepts every remaining {column} value")
    elif spec is not None and spec.declared_domain is not None:
        missing = [v for v in spec.declared_domain if v not in covered]
        if missing:
            rendered = ", ".join(str(to_json(v)) for v in missing)
            comp_level = ERROR
            comp_messages.append(
                f"declared domain value(s) {rendered} of column {column} "
                f"are assigned to no fragment"
            )
        else:
            comp_level = PASS
            comp_messages.append("every declared domain value is assigned to a fragment")
    else:
        comp_level = INDETERMINATE
        comp_messages.append(
            f"column {column} has no declared domain and no default site; "
            f"completeness cannot be decided over an open domain"
        )
    completeness = Verdict(COMPLETENESS, comp_level, table, tuple(comp_messages))

    rec_level = _worst([dis_level, comp_level])
    rec_messages: list[str] = []
    if rec_level == PASS:
        rec_messages.append("union of the fragment selections rebuilds the relation")
    elif rec_level == INDETERMINATE:
        rec_messages.append("depends on completeness, which is indeterminate")
    else:
        rec_messages.append("cannot rebuild the relation: see completeness/disjointness")
    reconstruction = Verdict(RECONSTRUCTION, rec_level, table, tuple(rec_messages))
    return reconstruction, completeness, disjointness


def _vertical_verdicts(plan: FragmentationPlan, table: str):
    schema_table = plan.schema.table(table)
    tp = plan.policy.for_table(table)
    groups = plan.projection_groups(table)
    split = plan.split_families(table)

    # Column coverage counts every distinct projection (split families count
    # once; replicas of a group count once).
    coverage: dict[str, list[str]] = {c: [] for c in schema_table.column_names}
    shared_declared: set[str] = set()
    if tp is not None:
        for spec in tp.vertical:
            shared_declared.update(spec.shared_columns)
    for group, frags in {**split, **groups}.items():
        for col in frags[0].columns:
            coverage[col].append(group)

    comp_messages: list[str] = []
    for col, owners in coverage.items():
        if not owners:
            comp_messages.append(f"column {col} appears in no fragment")
    comp_level = ERROR if comp_messages else PASS
    if comp_level == PASS:
        comp_messages.append("every column appears in at least one fragment")
    completeness = Verdict(COMPLETENESS, comp_level, table, tuple(comp_messages))

    warn_messages: list[str] = []
    err_messages: list[str] = []
    pk = set(schema_table.primary_key)
    for col, owners in coverage.items():
        if col in pk or len(owners) <= 1:
            continue
        where = " and ".join(owners)
        if col in shared_declared:
            warn_messages.append(f"column {col} is deliberately duplicated in {where}")
        else:
            err_messages.append(f"column {col} appears in {where} without a sharing declaration")
    if err_messages:
        disjointness = Verdict(DISJOINTNESS, ERROR, table, tuple(err_messages + warn_messages))
    elif warn_messages:
        disjointness = Verdict(DISJOINTNESS, WARNING, table, tuple(warn_messages))
    else:
        disjointness = Verdict(
            DISJOINTNESS, PASS, table, ("each non-key column lives in exactly one fragment",)
        )

    # Every fragment carries the key by construction, so the key join
    # rebuilds the table as long as nothing is missing entirely.
    rec_level = ERROR if comp_level == ERROR else PASS
    rec_msg = (
        "join on the primary key rebuilds the relation"
        if rec_level == PASS
        else "cannot rebuild the relation: some columns are lost"
    )
    reconstruction = Verdict(RECONSTRUCTION, rec_level, table, (rec_msg,))
    return reconstruction, completeness, disjointness


def _derived_verdicts(plan: FragmentationPlan, table: str, report_by_table: dict[str, str]):
    edge = plan.derived_edge(table)
    assert edge is not None
    fk_cols, parent = edge
    parent_level = report_by_table.get(parent, PASS)
    schema_table = plan.schema.table(table)
    nullable_fk = any(schema_table.column(c).nullable for c in fk_cols)

    messages = [f"rows follow their {parent} parent via ({', '.join(fk_cols)})"]
    comp_level = parent_level
    if nullable_fk:
        comp_level = _worst([comp_level, INDETERMINATE])
        messages.append(
            f"foreign key column(s) {', '.join(fk_cols)} are nullable; "
            f"rows with null keys have no home fragment"
        )
    completeness = Verdict(COMPLETENESS, comp_level, table, tuple(messages))
    disjointness = Verdict(
        DISJOINTNESS,
        parent_level,
        table,
        (f"inherits the row partition of {parent}",),
    )
    reconstruction = Verdict(
        RECONSTRUCTION,
        comp_level,
        table,
        (f"union of the co-located fragments rebuilds the relation when {parent} validates",),
    )
    return reconstruction, completeness, disjointness


def validate(plan: FragmentationPlan, schema: Schema | None = None, data=None) -> ValidationReport:
    """Check the three correctness criteria for every fragmented table.

    When sample ``data`` (a simulator dataset) is supplied and the plan has
    no blocking findings, reconstruction is additionally confirmed
    empirically: the data is distributed and rebuilt, and any table that
    does not survive the round-trip gets a reconstruction error.
    """
    schema = schema or plan.schema
    verdicts: list[Verdict] = []
    partition_outcome: dict[str, str] = {}

    for table in plan.fragmented_tables():
        split = plan.split_families(table)
        groups = plan.projection_groups(table)
        partition = plan.partition_fragments(table)
        is_derived = bool(partition) and partition[0].kind == DERIVED

        if is_derived:
            rec, comp, dis = _derived_verdicts(plan, table, partition_outcome)
            partition_outcome[table] = _worst([comp.level, dis.level])
        elif split and groups:
            # Hybrid: horizontal criteria on the split family, vertical
            # criteria on the column decomposition; keep the worst of each.
            h_rec, h_comp, h_dis = _horizontal_verdicts(plan, table, partition)
            v_rec, v_comp, v_dis = _vertical_verdicts(plan, table)
            rec = _merge(h_rec, v_rec)
            comp = _merge(h_comp, v_comp)
            dis = _merge(h_dis, v_dis)
            # Children co-locate along the row partition, so they inherit
            # only the horizontal outcome, not column-sharing warnings.
            partition_outcome[table] = _worst([h_comp.level, h_dis.level])
        elif split:
            rec, comp, dis = _horizontal_verdicts(plan, table, partition)
            partition_outcome[table] = _worst([comp.level, dis.level])
        else:
            rec, comp, dis = _vertical_verdicts(plan, table)
            partition_outcome[table] = _worst([comp.level, dis.level])
        verdicts.extend([rec, comp, dis])

    if data is not None and not any(v.level == ERROR for v in verdicts):
        verdicts = _confirm_empirically(plan, verdicts, data)

    for frag in plan.fragments:
        message = check_fragment_pk(frag, schema)
        if message:
            verdicts.append(Verdict(STRUCTURAL, ERROR, frag.table, (message,)))

    levels = [v.level for v in verdicts]
    if ERROR in levels:
        overall = INVALID
    elif WARNING in levels or INDETERMINATE in levels:
        overall = VALID_WITH_WARNINGS
    else:
        overall = VALID
    return ValidationReport(verdicts=tuple(verdicts), overall=overall)


def _confirm_empirically(plan: FragmentationPlan, verdicts: list[Verdict], data) -> list[Verdict]:
    from . import simulator

    outcome = simulator.reconstruct(simulator.distribute(plan, data), plan)
    updated: list[Verdict] = []
    for v in verdicts:
        if v.criterion != RECONSTRUCTION or v.table not in data.relations:
            updated.append(v)
            continue
        original = data.relations[v.table]
        rebuilt = outcome.dataset.relations.get(v.table)
        if rebuilt is not None and simulator.multiset_equal(original.rows, rebuilt.rows):
            updated.append(
                Verdict(v.criterion, v.level, v.table, v.messages + ("confirmed on sample data",))
            )
        else:
            updated.append(
                Verdict(
                    v.criterion,
                    ERROR,
                    v.table,
                    v.messages + ("sample data did not survive the distribution round-trip",),
                )
            )
    return updated


def _merge(a: Verdict, b: Verdict) -> Verdict:
    level = _worst([a.level, b.level])
    return Verdict(a.criterion, level, a.table, tuple(a.messages) + tuple(b.messages))


def render_report_text(report: ValidationReport) -> str:
    """Stable human-readable rendering; identical reports render identically."""
    lines: list[str] = []
    for v in report.verdicts:
        lines.append(f"{v.table} {v.criterion}: {v.level.upper()}")
        for msg in v.messages:
            lines.append(f"  - {msg}")
    lines.append(f"overall: {report.overall}")
    return "\n".join(lines) + "\n"


def report_to_json(report: ValidationReport) -> dict:
    return {
        "overall": report.overall,
        "verdicts": [
            {
                "criterion": v.criterion,
                "level": v.level,
                "table": v.table,
                "messages": list(v.messages),
            }
            for v in report.verdicts
        ],
    }


def render_report_json(report: ValidationReport) -> str:
    return json.dumps(report_to_json(report), indent=2, sort_keys=False) + "\n"
