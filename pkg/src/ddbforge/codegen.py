"""Compile a validated fragmentation plan into per-site SQL scripts.

Each site receives one script with a fixed section order: account stub,
database links, fragment tables, synonyms, materialized views, routing
triggers, then helper procedures. Every object a script references is
either created earlier in the same script or reached through a synonym and
database link created earlier, so scripts are self-contained deliverables.
Generation is a pure function of the plan; two runs over identical inputs
produce byte-identical files.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass

from . import templates as tpl
from .errors import CodegenError
from .fragmenter import CATCH_ALL, DERIVED, Fragment, FragmentationPlan
from .schema import Table
from .topology import Site
from .validator import INVALID, ValidationReport, validate
from .values import sql_literal

REDACTED_SECRET = "********"

SECTION_ORDER = ("account_stub", "dblink", "table", "synonym", "mview", "trigger", "procedure", "comment")


@dataclass(frozen=True)
class SqlStatement:
    kind: str
    object_name: str
    text: str

    def __post_init__(self) -> None:
        if not self.text:
            raise CodegenError(f"empty statement for {self.kind} {self.object_name}")


@dataclass(frozen=True)
class SiteScript:
    site: str
    statements: tuple[SqlStatement, ...]

    def render(self) -> str:
        return tpl.STATEMENT_SEPARATOR.join(s.text for s in self.statements) + "\n"


@dataclass(frozen=True)
class ScriptBundle:
    scripts: tuple[SiteScript, ...]
    manifest: dict[str, str]


def script_filename(site: Site) -> str:
    return f"{site.logical_name.upper()}_DDB_SCRIPT.sql"


class _References:
    """Ordered record of fragments a site's statements mention, so the
    synonym section can cover exactly the remote ones."""

    def __init__(self, plan: FragmentationPlan, site: Site):
        self.plan = plan
        self.site = site
        self.remote: dict[str, Fragment] = {}

    def use(self, fragment: Fragment) -> str:
        if fragment.site != self.site.logical_name:
            self.remote.setdefault(fragment.id, fragment)
        return fragment.id

    def ordered_remote(self) -> list[Fragment]:
        order = {f.id: i for i, f in enumerate(self.plan.fragments)}
        return sorted(self.remote.values(), key=lambda f: order[f.id])


def _column_defs(table: Table, columns: tuple[str, ...]) -> list[str]:
    defs = []
    for name in columns:
        col = table.column(name)
        text = f"{col.name} {col.ctype.sql()}"
        if not col.nullable and col.name not in table.primary_key:
            text += " NOT NULL"
        defs.append(text)
    return defs


def _pk_condition(pk_columns: tuple[str, ...], prefix: str) -> str:
    return " AND ".join(f"{c} = {prefix}{c}" for c in pk_columns)


def _predicate_condition(column: str, values: tuple) -> str:
    if len(values) == 1:
        return f":new.{column} = {sql_literal(values[0])}"
    rendered = ", ".join(sql_literal(v) for v in values)
    return f":new.{column} IN ({rendered})"


def _insert_lines(fragment_name: str, columns: tuple[str, ...], value_prefix: str) -> list[str]:
    cols = ", ".join(columns)
    vals = ", ".join(f"{value_prefix}{c}" for c in columns)
    return [f"INSERT INTO {fragment_name} ({cols})", f"VALUES ({vals});"]


def _local_or_primary(plan: FragmentationPlan, group: tuple[Fragment, ...], site: Site) -> Fragment:
    for frag in group:
        if frag.site == site.logical_name:
            return frag
    for frag in group:
        if frag.primary_copy:
            return frag
    return group[0]


def _reconstruction_query(
    plan: FragmentationPlan, table: Table, site: Site, refs: _References
) -> str:
    """UNION of horizontal fragments, key-join of vertical projections."""
    families = plan.split_families(table.name)
    groups = plan.projection_groups(table.name)
    if not families:
        partition = plan.partition_fragments(table.name)
        if partition and partition[0].kind == DERIVED:
            families = {partition[0].group: partition}

    sources: list[tuple[str, tuple[str, ...], bool]] = []  # (sql, columns, is_subquery)
    for family in families.values():
        columns = family[0].columns
        selects = [tpl.plain_select(list(columns), refs.use(f)) for f in family]
        sources.append((tpl.union_query(selects), columns, True))
    for group in groups.values():
        copy = _local_or_primary(plan, group, site)
        sources.append((refs.use(copy), copy.columns, False))

    if not sources:
        raise CodegenError(f"table {table.name} has no fragments to reconstruct")
    if len(sources) == 1:
        sql, columns, is_subquery = sources[0]
        if is_subquery:
            return sql
        return tpl.plain_select(list(columns), sql)

    aliases = [f"f{i}" for i in range(len(sources))]
    owner: dict[str, str] = {}
    for alias, (_, columns, _) in zip(aliases, sources):
        for col in columns:
            owner.setdefault(col, alias)
    select_list = ", ".join(f"{owner[c]}.{c}" for c in table.column_names)
    from_list = ", ".join(
        f"(\n{sql}\n) {alias}" if is_subquery else f"{sql} {alias}"
        for alias, (sql, _, is_subquery) in zip(aliases, sources)
    )
    join_conditions = " AND ".join(
        f"{alias}.{c} = f0.{c}" for alias in aliases[1:] for c in table.primary_key
    )
    return f"select {select_list}\nfrom {from_list}\nwhere {join_conditions}"


def _routing_trigger(
    plan: FragmentationPlan, table: Table, refs: _References
) -> tuple[str, str]:
    """Build the before-insert routing trigger; returns (name, text)."""
    families = plan.split_families(table.name)
    groups = plan.projection_groups(table.name)
    partition = plan.partition_fragments(table.name)
    is_derived = bool(partition) and partition[0].kind == DERIVED
    placed = set(plan.fragmented_tables())

    declarations = ["v_existing"]
    body: list[str] = []

    # Global key uniqueness, counted over the reconstruction view.
    body.append(
        f"  SELECT COUNT(*) INTO v_existing FROM {table.name} "
        f"WHERE {_pk_condition(table.primary_key, ':new.')};"
    )
    body.append("  IF (v_existing >= 1) THEN")
    body.append(f"    {tpl.raise_error(tpl.ERR_DUPLICATE_KEY, 'constraint violation')}")
    body.append("  END IF;")

    derivation_edge = plan.derived_edge(table.name) if is_derived else None
    fk_index = 0
    for fk in table.foreign_keys:
        if fk.ref_table not in placed:
            continue
        if derivation_edge and fk.ref_table == derivation_edge[1] and tuple(fk.columns) == derivation_edge[0]:
            continue  # enforced by the co-location routing below
        fk_index += 1
        var = f"v_fk_{fk_index}"
        declarations.append(var)
        condition = " AND ".join(f"{rc} = :new.{c}" for c, rc in zip(fk.columns, fk.ref_columns))
        nullable = [c for c in fk.columns if table.column(c).nullable]
        guard = [
            f"  SELECT COUNT(*) INTO {var} FROM {fk.ref_table} WHERE {condition};",
            f"  IF ({var} = 0) THEN",
            f"    {tpl.raise_error(tpl.ERR_FK_VIOLATION, f'foreign key violation: {fk.name}')}",
            "  END IF;",
        ]
        if nullable:
            null_check = " AND ".join(f":new.{c} IS NOT NULL" for c in nullable)
            guard = [f"  IF ({null_check}) THEN"] + ["  " + line for line in guard] + ["  END IF;"]
        body.extend(guard)

    group_primaries = [
        next((f for f in group if f.primary_copy), group[0]) for group in groups.values()
    ]

    if is_derived:
        assert derivation_edge is not None
        fk_columns, parent_name = derivation_edge
        parent_table = plan.schema.table(parent_name)
        lookup_condition = " AND ".join(
            f"{pc} = :new.{c}" for c, pc in zip(fk_columns, parent_table.primary_key)
        )
        for i, frag in enumerate(partition, start=1):
            declarations.append(f"v_parent_{i}")
            parent_frag = plan.fragment(frag.parent_fragment)  # type: ignore[arg-type]
            body.append(
                f"  SELECT COUNT(*) INTO v_parent_{i} FROM {refs.use(parent_frag)} "
                f"WHERE {lookup_condition};"
            )
        for i, frag in enumerate(partition, start=1):
            keyword = "IF" if i == 1 else "ELSIF"
            body.append(f"  {keyword} (v_parent_{i} >= 1) THEN")
            for line in _insert_lines(refs.use(frag), frag.columns, ":new."):
                body.append(f"    {line}")
        body.append("  ELSE")
        body.append(
            "    "
            + tpl.raise_error(
                tpl.ERR_FK_VIOLATION,
                f"foreign key violation: no fragment of {parent_name} holds this key",
            )
        )
        body.append("  END IF;")
    elif families:
        # Branches follow the partition family's predicates; parallel split
        # families contribute their co-sited fragment to the same branch.
        in_branches = [f for f in partition if f.predicate and f.predicate.kind != CATCH_ALL]
        catch_all = [f for f in partition if f.predicate and f.predicate.kind == CATCH_ALL]

        def branch_inserts(lead: Fragment) -> list[str]:
            lines: list[str] = []
            for family in families.values():
                sibling = next(
                    (
                        f
                        for f in family
                        if f.site == lead.site and f.predicate == lead.predicate
                    ),
                    None,
                )
                if sibling is not None:
                    for line in _insert_lines(refs.use(sibling), sibling.columns, ":new."):
                        lines.append(f"    {line}")
            for primary in group_primaries:
                for line in _insert_lines(refs.use(primary), primary.columns, ":new."):
                    lines.append(f"    {line}")
            return lines

        for i, frag in enumerate(in_branches):
            assert frag.predicate is not None
            keyword = "IF" if i == 0 else "ELSIF"
            condition = _predicate_condition(frag.predicate.column, frag.predicate.values)
            body.append(f"  {keyword} {condition} THEN")
            body.extend(branch_inserts(frag))
        body.append("  ELSE")
        if catch_all:
            body.extend(branch_inserts(catch_all[0]))
        else:
            column = in_branches[0].predicate.column if in_branches else "?"
            body.append(
                "    "
                + tpl.raise_error(
                    tpl.ERR_UNROUTABLE, f"no fragment accepts this {column} value"
                )
            )
        body.append("  END IF;")
    else:
        for primary in group_primaries:
            for line in _insert_lines(refs.use(primary), primary.columns, ":new."):
                body.append(f"  {line}")

    name = f"ROUTE_{table.name}"
    text = "\n".join(
        [tpl.trigger_header(name, table.name, declarations)] + body + [tpl.trigger_footer()]
    )
    return name, text


_PARAM_TYPES = {"number": "NUMBER", "varchar": "VARCHAR2", "date": "DATE"}


def _helper_procedures(
    plan: FragmentationPlan, table: Table, refs: _References
) -> list[tuple[str, str]]:
    """Insert/update/delete helpers that funnel through the routing trigger."""
    out: list[tuple[str, str]] = []
    all_cols = table.column_names
    params_all = [f"p_{c} {_PARAM_TYPES[table.column(c).ctype.kind]}" for c in all_cols]
    params_pk = [f"p_{c} {_PARAM_TYPES[table.column(c).ctype.kind]}" for c in table.primary_key]

    insert_name = f"INSERT_{table.name}"
    out.append(
        (
            insert_name,
            tpl.procedure(
                insert_name,
                params_all,
                [
                    f"INSERT INTO {table.name} ({', '.join(all_cols)})",
                    f"VALUES ({', '.join('p_' + c for c in all_cols)});",
                ],
            ),
        )
    )

    delete_name = f"DELETE_{table.name}"
    delete_lines = []
    for frag in plan.fragments_of(table.name):
        if not frag.primary_copy:
            continue  # replicas converge on refresh
        delete_lines.append(
            f"DELETE FROM {refs.use(frag)} WHERE {_pk_condition(table.primary_key, 'p_')};"
        )
    out.append((delete_name, tpl.procedure(delete_name, params_pk, delete_lines)))

    update_name = f"UPDATE_{table.name}"
    out.append(
        (
            update_name,
            tpl.procedure(
                update_name,
                params_all,
                [
                    f"{delete_name}({', '.join('p_' + c for c in table.primary_key)});",
                    f"{insert_name}({', '.join('p_' + c for c in all_cols)});",
                ],
            ),
        )
    )
    return out


def generate_site_script(
    plan: FragmentationPlan,
    site: Site,
    *,
    redact: bool = False,
    report: ValidationReport | None = None,
) -> SiteScript:
    """Emit the full implementation script for one site."""
    if site.logical_name not in plan.topology:
        raise CodegenError(f"site {site.logical_name} is not part of the plan's topology")
    if report is None:
        report = validate(plan)
    if report.overall == INVALID:
        raise CodegenError("refusing to generate scripts from an invalid plan")

    refs = _References(plan, site)
    secret = REDACTED_SECRET if redact else site.secret

    # Build the later sections first so the synonym section can cover every
    # remote fragment they mention.
    table_stmts: list[SqlStatement] = []
    for frag in plan.fragments:
        if frag.site == site.logical_name and frag.primary_copy:
            table = plan.schema.table(frag.table)
            text = tpl.create_table(
                frag.id, _column_defs(table, frag.columns), list(table.primary_key)
            )
            table_stmts.append(
                SqlStatement("table", frag.id, f"{tpl.banner('table', frag.id)}\n{text}")
            )

    mview_stmts: list[SqlStatement] = []
    for frag in plan.fragments:
        if frag.site == site.logical_name and not frag.primary_copy:
            group = plan.projection_groups(frag.table).get(frag.group, ())
            primary = next((f for f in group if f.primary_copy), None)
            if primary is None:
                raise CodegenError(f"replica {frag.id} has no primary copy")
            tp = plan.policy.for_table(frag.table)
            refresh = tp.refresh if tp else None
            query = tpl.plain_select(list(frag.columns), refs.use(primary))
            text = tpl.materialized_view(
                frag.id,
                refresh.mode if refresh else "complete",
                refresh.interval_days if refresh else 7,
                query,
            )
            mview_stmts.append(
                SqlStatement("mview", frag.id, f"{tpl.banner('mview', frag.id)}\n{text}")
            )
    for table_name in plan.fragmented_tables():
        table = plan.schema.table(table_name)
        tp = plan.policy.for_table(table_name)
        refresh = tp.refresh if tp else None
        query = _reconstruction_query(plan, table, site, refs)
        text = tpl.materialized_view(
            table_name,
            refresh.mode if refresh else "complete",
            refresh.interval_days if refresh else 7,
            query,
        )
        mview_stmts.append(
            SqlStatement("mview", table_name, f"{tpl.banner('mview', table_name)}\n{text}")
        )

    trigger_stmts: list[SqlStatement] = []
    procedure_stmts: list[SqlStatement] = []
    for table_name in plan.fragmented_tables():
        table = plan.schema.table(table_name)
        name, text = _routing_trigger(plan, table, refs)
        trigger_stmts.append(
            SqlStatement("trigger", name, f"{tpl.banner('trigger', name)}\n{text}")
        )
        for proc_name, proc_text in _helper_procedures(plan, table, refs):
            procedure_stmts.append(
                SqlStatement(
                    "procedure", proc_name, f"{tpl.banner('procedure', proc_name)}\n{proc_text}"
                )
            )

    statements: list[SqlStatement] = []
    statements.append(
        SqlStatement(
            "account_stub",
            site.logical_name,
            tpl.account_stub(site.logical_name, site.user, secret),
        )
    )
    for other in plan.topology.sites:
        if other.logical_name == site.logical_name:
            continue
        text = tpl.database_link(
            other.dblink_name,
            other.user,
            REDACTED_SECRET if redact else other.secret,
            other.network_address,
            other.port,
            other.service_name,
        )
        statements.append(
            SqlStatement(
                "dblink", other.dblink_name, f"{tpl.banner('dblink', other.dblink_name)}\n{text}"
            )
        )
    statements.extend(table_stmts)
    for frag in refs.ordered_remote():
        link = plan.topology.site(frag.site).dblink_name
        text = tpl.synonym(frag.id, frag.id, link)
        statements.append(
            SqlStatement("synonym", frag.id, f"{tpl.banner('synonym', frag.id)}\n{text}")
        )
    statements.extend(mview_stmts)
    statements.extend(trigger_stmts)
    statements.extend(procedure_stmts)

    if not plan.fragments:
        statements.append(
            SqlStatement(
                "comment",
                site.logical_name,
                "-----\n-- Note\n-----\n-- The distribution policy places no fragments; only the\n"
                "-- database links above are required on this site.",
            )
        )
    return SiteScript(site=site.logical_name, statements=tuple(statements))


def generate_bundle(plan: FragmentationPlan, *, redact: bool = False) -> ScriptBundle:
    """Generate every site script plus the file manifest (not yet written)."""
    report = validate(plan)
    if report.overall == INVALID:
        raise CodegenError("refusing to generate scripts from an invalid plan")
    scripts = tuple(
        generate_site_script(plan, site, redact=redact, report=report)
        for site in plan.topology.sites
    )
    filenames: dict[str, str] = {}
    manifest: dict[str, str] = {}
    for site, script in zip(plan.topology.sites, scripts):
        filename = script_filename(site)
        if filename in filenames:
            raise CodegenError(
                f"sites {filenames[filename]} and {site.logical_name} map to the same "
                f"file name {filename} after uppercasing"
            )
        filenames[filename] = site.logical_name
        digest = hashlib.sha256(script.render().encode("utf-8")).hexdigest()
        manifest[filename] = f"sha256:{digest}"
    return ScriptBundle(scripts=scripts, manifest=manifest)


def emit_bundle(
    plan: FragmentationPlan, output_dir: str, *, redact: bool = False
) -> ScriptBundle:
    """Write one UTF-8, LF-terminated ``.sql`` file per site plus
    ``manifest.json`` with per-file digests."""
    bundle = generate_bundle(plan, redact=redact)
    os.makedirs(output_dir, exist_ok=True)
    for site, script in zip(plan.topology.sites, bundle.scripts):
        path = os.path.join(output_dir, script_filename(site))
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(script.render())
    manifest_path = os.path.join(output_dir, "manifest.json")
    with open(manifest_path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(bundle.manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return bundle
