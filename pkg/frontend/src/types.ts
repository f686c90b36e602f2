// API document shapes exchanged with the ddbforge service.

export interface Diagnostic {
  severity: "error" | "warning";
  code: string;
  message: string;
  line?: number;
  column?: number;
}

export interface ColumnDoc {
  name: string;
  type: { kind: string; length?: number; char_semantics?: boolean };
  nullable: boolean;
}

export interface TableDoc {
  name: string;
  columns: ColumnDoc[];
  primary_key: string[];
  foreign_keys: { name: string; columns: string[]; ref_table: string; ref_columns: string[] }[];
}

export interface SiteDraft {
  name: string;
  host: string;
  port: number;
  service: string;
  dblink: string;
  user: string;
  password: string;
}

export interface HorizontalDoc {
  column: string;
  assignments: Record<string, (string | number)[]>;
  default_site?: string | null;
  domain?: (string | number)[];
}

export interface VerticalFragmentDoc {
  name: string;
  columns: string[];
  sites?: string[];
  primary_site?: string;
  shared_columns?: string[];
}

export interface TablePolicyDoc {
  table: string;
  mode: "none" | "horizontal" | "vertical" | "hybrid" | "replicate_full";
  horizontal?: HorizontalDoc;
  vertical?: VerticalFragmentDoc[];
  refresh?: { mode: "complete" | "fast"; interval_days: number };
  derive_from?: string | null;
}

export interface Verdict {
  criterion: "reconstruction" | "completeness" | "disjointness" | "structural";
  level: "pass" | "warning" | "error" | "indeterminate";
  table: string;
  messages: string[];
}

export interface Report {
  overall: "valid" | "valid_with_warnings" | "invalid";
  verdicts: Verdict[];
}

export interface FragmentNode {
  id: string;
  site: string;
  kind: string;
  columns: string[];
  primary_copy: boolean;
  primary_key: string[];
}

export interface PlanDoc {
  fragments: {
    id: string;
    table: string;
    kind: string;
    columns: string[];
    site: string;
    primary_copy: boolean;
  }[];
  table_trees: Record<string, FragmentNode[]>;
}

export interface ProjectSummary {
  id: string;
  name: string;
  version: number;
  schema: { tables: TableDoc[] } | null;
  schema_ddl: string | null;
  topology: { sites: SiteDraft[] } | null;
  policy: { tables: TablePolicyDoc[] };
  last_report: Report | null;
  report_version: number;
}
