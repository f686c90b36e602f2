// Wizard state machine. All transitions are pure functions so the rules
// are testable without a DOM:
//  - steps advance or retreat one at a time, with one exception: a negative
//    validation report may jump straight back to the fragmentation step;
//  - the sites step blocks progression until at least one complete site
//    card exists;
//  - the fragment column checklist survives consecutive fragment
//    definitions until explicitly cleared (button or Alt+R).
// No fragmentation verdict is ever computed here; everything displayed
// comes from the service.

import type {
  PlanDoc,
  Report,
  SiteDraft,
  TableDoc,
  TablePolicyDoc,
} from "./types.js";

export const STEPS = ["schema", "sites", "fragmentation", "validation", "generation"] as const;
export type Step = (typeof STEPS)[number];

export type FragmentationType = TablePolicyDoc["mode"];

export interface FragmentDraft {
  name: string;
  columns: string[]; // checklist, kept across consecutive definitions
  site: string;
}

export interface WizardState {
  step: Step;
  projectId: string | null;
  version: number;
  stale: boolean;
  schemaDdl: string;
  tables: TableDoc[];
  siteCount: number;
  sites: SiteDraft[];
  policies: Record<string, TablePolicyDoc>;
  currentTable: string | null;
  fragmentType: FragmentationType;
  draft: FragmentDraft;
  lastReport: Report | null;
  plan: PlanDoc | null;
  error: string | null;
}

export function initialState(): WizardState {
  return {
    step: "schema",
    projectId: null,
    version: 0,
    stale: false,
    schemaDdl: "",
    tables: [],
    siteCount: 0,
    sites: [],
    policies: {},
    currentTable: null,
    fragmentType: "horizontal",
    draft: { name: "", columns: [], site: "" },
    lastReport: null,
    plan: null,
    error: null,
  };
}

export function stepIndex(step: Step): number {
  return STEPS.indexOf(step);
}

function siteComplete(site: SiteDraft): boolean {
  return site.name.trim() !== "" && site.host.trim() !== "" && site.dblink.trim() !== "";
}

/** Whether the current step's work is complete enough to move forward. */
export function canAdvance(state: WizardState): boolean {
  switch (state.step) {
    case "schema":
      return state.tables.length > 0;
    case "sites":
      return state.sites.length >= 1 && state.sites.every(siteComplete);
    case "fragmentation":
      return true;
    case "validation":
      return state.lastReport !== null && state.lastReport.overall !== "invalid";
    case "generation":
      return false;
  }
}

export function goNext(state: WizardState): WizardState {
  const index = stepIndex(state.step);
  if (index >= STEPS.length - 1 || !canAdvance(state)) return state;
  return { ...state, step: STEPS[index + 1], error: null };
}

export function goBack(state: WizardState): WizardState {
  const index = stepIndex(state.step);
  if (index === 0) return state;
  return { ...state, step: STEPS[index - 1], error: null };
}

/**
 * The one non-adjacent transition: a negative validation report sends the
 * designer straight back to fragmentation to fix the policy.
 */
export function returnToFragmentation(state: WizardState): WizardState {
  if (state.step !== "validation") return state;
  if (state.lastReport === null || state.lastReport.overall !== "invalid") return state;
  return { ...state, step: "fragmentation", error: null };
}

export function setSchema(
  state: WizardState,
  ddl: string,
  tables: TableDoc[],
  version: number,
): WizardState {
  // New schema invalidates any report or plan shown before.
  return {
    ...state,
    schemaDdl: ddl,
    tables,
    version,
    lastReport: null,
    plan: null,
    error: null,
  };
}

export function setSiteCount(state: WizardState, count: number): WizardState {
  const sites = [...state.sites];
  while (sites.length < count) {
    sites.push({ name: "", host: "", port: 1521, service: "", dblink: "", user: "", password: "" });
  }
  sites.length = count;
  return { ...state, siteCount: count, sites };
}

export function updateSite(state: WizardState, index: number, patch: Partial<SiteDraft>): WizardState {
  const sites = state.sites.map((s, i) => (i === index ? { ...s, ...patch } : s));
  return { ...state, sites };
}

export function selectTable(state: WizardState, table: string | null): WizardState {
  return { ...state, currentTable: table };
}

export function selectFragmentType(state: WizardState, type: FragmentationType): WizardState {
  return { ...state, fragmentType: type };
}

export function toggleDraftColumn(state: WizardState, column: string): WizardState {
  const columns = state.draft.columns.includes(column)
    ? state.draft.columns.filter((c) => c !== column)
    : [...state.draft.columns, column];
  return { ...state, draft: { ...state.draft, columns } };
}

export function setDraft(state: WizardState, patch: Partial<FragmentDraft>): WizardState {
  return { ...state, draft: { ...state.draft, ...patch } };
}

/**
 * Record a vertical fragment into the current table's policy entry. The
 * column checklist deliberately survives so the same fragment can be
 * assigned to another site without re-ticking columns.
 */
export function addDraftFragment(state: WizardState): WizardState {
  if (!state.currentTable || !state.draft.name || !state.draft.site) return state;
  if (state.draft.columns.length === 0) return state;
  const table = state.currentTable;
  const existing = state.policies[table] ?? { table, mode: state.fragmentType };
  const vertical = [...(existing.vertical ?? [])];
  const already = vertical.findIndex((v) => v.name === state.draft.name.toUpperCase());
  const fragment = {
    name: state.draft.name.toUpperCase(),
    columns: [...state.draft.columns],
    sites: [state.draft.site],
    primary_site: state.draft.site,
  };
  if (already >= 0) {
    const merged = new Set([...(vertical[already].sites ?? []), state.draft.site]);
    vertical[already] = { ...vertical[already], sites: [...merged] };
  } else {
    vertical.push(fragment);
  }
  const policies = {
    ...state.policies,
    [table]: { ...existing, table, mode: state.fragmentType, vertical },
  };
  return { ...state, policies };
}

/** Explicit clear control (and the Alt+R shortcut) flushes the checklist. */
export function clearDraftSelection(state: WizardState): WizardState {
  return { ...state, draft: { name: "", columns: [], site: "" } };
}

export function setPolicies(state: WizardState, policies: TablePolicyDoc[], version: number): WizardState {
  const byTable: Record<string, TablePolicyDoc> = {};
  for (const entry of policies) byTable[entry.table] = entry;
  return { ...state, policies: byTable, version, lastReport: null, plan: null };
}

export function setReport(state: WizardState, report: Report, plan: PlanDoc, version: number): WizardState {
  return { ...state, lastReport: report, plan, version };
}

export function markStale(state: WizardState): WizardState {
  return { ...state, stale: true };
}
