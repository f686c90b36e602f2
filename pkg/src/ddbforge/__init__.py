"""ddbforge: compile a centralized schema plus a distribution policy into
validated, per-site SQL implementation scripts, with an executable in-memory
model that proves the fragmentation correct before any script is written."""

from .ddl import parse_ddl
from .errors import (
    AmbiguousDerivationError,
    CodegenError,
    DatasetError,
    DdbforgeError,
    DdlSyntaxError,
    PlanError,
    PolicyError,
    SchemaError,
    TopologyError,
)
from .fragmenter import (
    Fragment,
    FragmentationPlan,
    Predicate,
    build_plan,
    derive_fragments,
    plan_from_json,
    plan_tables,
    plan_to_json,
)
from .policy import (
    DistributionPolicy,
    HorizontalSpec,
    RefreshPolicy,
    TablePolicy,
    VerticalFragmentSpec,
    parse_policy,
    render_policy,
)
from .schema import (
    Column,
    ColumnType,
    ForeignKey,
    Schema,
    Table,
    check_schema,
    render_ddl,
    schema_from_json,
    schema_to_json,
)
from .simulator import (
    Dataset,
    Relation,
    SiteImage,
    check_global_integrity,
    distribute,
    generate_dataset,
    load_dataset,
    multiset_equal,
    reconstruct,
    route_insert,
)
from .topology import Site, Topology, topology_from_json, topology_to_json, validate_topology
from .validator import ValidationReport, Verdict, check_fragment_pk, validate
from .codegen import ScriptBundle, SiteScript, SqlStatement, emit_bundle, generate_bundle, generate_site_script

__version__ = "0.1.0"
