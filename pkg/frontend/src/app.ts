// Wizard shell: owns the state, re-renders on every change, and wires DOM
// events to state transitions and API calls. All domain results come from
// the service; this file only moves data.

import { ApiClient, ApiError } from "./api.js";
import { saveFile } from "./download.js";
import * as state from "./state.js";
import type { WizardState } from "./state.js";
import type { HorizontalDoc, TablePolicyDoc, VerticalFragmentDoc } from "./types.js";
import { readZip } from "./unzip.js";
import { render } from "./views.js";

const api = new ApiClient("");
let current: WizardState = state.initialState();
let root: HTMLElement;
let downloads: { name: string; data: Uint8Array }[] = [];

function update(next: WizardState): void {
  current = next;
  root.innerHTML = render(current);
  renderDownloadList();
}

function fail(err: unknown): void {
  if (err instanceof ApiError) {
    if (err.stale) {
      update(state.markStale(current));
      return;
    }
    const detail = err.diagnostics.map((d) => d.message).join("; ");
    update({ ...current, error: detail ? `${err.message}: ${detail}` : err.message });
    return;
  }
  update({ ...current, error: String(err) });
}

async function ensureProject(): Promise<string> {
  if (current.projectId) return current.projectId;
  const project = await api.createProject("wizard");
  current = { ...current, projectId: project.id, version: project.version };
  return project.id;
}

async function uploadSchema(): Promise<void> {
  const textarea = document.getElementById("ddl-input") as HTMLTextAreaElement;
  const fileInput = document.getElementById("ddl-file") as HTMLInputElement;
  let ddl = textarea.value;
  const file = fileInput.files?.[0];
  if (file) ddl = await file.text();
  const id = await ensureProject();
  const result = await api.putSchema(id, ddl, current.version);
  update(state.setSchema(current, ddl, result.tables, result.version));
}

function readSiteCards(): void {
  const cards = root.querySelectorAll<HTMLElement>("[data-site-index]");
  let next = current;
  cards.forEach((card) => {
    const index = Number(card.dataset.siteIndex);
    const patch: Record<string, string | number> = {};
    card.querySelectorAll<HTMLInputElement>("[data-site-field]").forEach((input) => {
      const field = input.dataset.siteField as string;
      patch[field] = field === "port" ? Number(input.value || 1521) : input.value;
    });
    next = state.updateSite(next, index, patch);
  });
  current = next;
}

async function saveSites(): Promise<void> {
  readSiteCards();
  const id = await ensureProject();
  const result = await api.putTopology(id, current.sites, current.version);
  update({ ...current, version: result.version, error: null });
}

function parseValues(text: string): (string | number)[] {
  return text
    .split(",")
    .map((v) => v.trim())
    .filter((v) => v !== "")
    .map((v) => (/^-?\d+$/.test(v) ? Number(v) : v));
}

function collectPolicy(): TablePolicyDoc | null {
  if (!current.currentTable) return null;
  const mode = current.fragmentType;
  const doc: TablePolicyDoc = { table: current.currentTable, mode };
  if (mode === "horizontal" || mode === "hybrid") {
    const column = (document.getElementById("horizontal-column") as HTMLSelectElement)?.value;
    const assignments: HorizontalDoc["assignments"] = {};
    root.querySelectorAll<HTMLInputElement>("[data-assignment-site]").forEach((input) => {
      const values = parseValues(input.value);
      if (values.length) assignments[input.dataset.assignmentSite as string] = values;
    });
    const horizontal: HorizontalDoc = { column, assignments };
    const defaultSite = (document.getElementById("default-site") as HTMLSelectElement)?.value;
    if (defaultSite) horizontal.default_site = defaultSite;
    const domain = parseValues(
      (document.getElementById("declared-domain") as HTMLInputElement)?.value ?? "",
    );
    if (domain.length) horizontal.domain = domain;
    doc.horizontal = horizontal;
  }
  if (mode === "vertical" || mode === "hybrid") {
    const vertical: VerticalFragmentDoc[] = current.policies[current.currentTable]?.vertical ?? [];
    if (!vertical.length) return null;
    doc.vertical = vertical;
  }
  return doc;
}

async function savePolicy(): Promise<void> {
  const doc = collectPolicy();
  if (!doc || !current.projectId) return;
  const result = await api.putTablePolicy(current.projectId, doc.table, doc, current.version);
  update(state.setPolicies(current, result.policy.tables, result.version));
}

async function runValidation(): Promise<void> {
  if (!current.projectId) return;
  const result = await api.validate(current.projectId);
  update(state.setReport(current, result.report, result.plan, result.version));
}

async function generateScripts(): Promise<void> {
  if (!current.projectId) return;
  const archive = await api.generate(current.projectId);
  downloads = await readZip(archive);
  update({ ...current, error: null });
}

function renderDownloadList(): void {
  const list = document.getElementById("download-list");
  if (!list) return;
  list.innerHTML = downloads
    .map(
      (entry, i) =>
        `<li><button type="button" data-download-index="${i}">${entry.name}</button> (${entry.data.length} bytes)</li>`,
    )
    .join("");
}

async function reloadProject(): Promise<void> {
  if (!current.projectId) return;
  const project = await api.getProject(current.projectId);
  update({
    ...current,
    stale: false,
    version: project.version,
    tables: project.schema?.tables ?? current.tables,
    policies: Object.fromEntries(project.policy.tables.map((p) => [p.table, p])),
    lastReport: project.last_report,
  });
}

async function onAction(action: string): Promise<void> {
  switch (action) {
    case "next":
      update(state.goNext(current));
      break;
    case "back":
      update(state.goBack(current));
      break;
    case "upload-schema":
      await uploadSchema();
      break;
    case "set-site-count": {
      const count = Number((document.getElementById("site-count") as HTMLInputElement).value);
      update(state.setSiteCount(current, Math.max(1, Math.min(16, count || 0))));
      break;
    }
    case "save-sites":
      await saveSites();
      break;
    case "add-fragment":
      update(state.addDraftFragment(current));
      break;
    case "clear-selection":
      update(state.clearDraftSelection(current));
      break;
    case "save-policy":
      await savePolicy();
      break;
    case "run-validation":
      await runValidation();
      break;
    case "fix-fragmentation":
      update(state.returnToFragmentation(current));
      break;
    case "generate":
      await generateScripts();
      break;
    case "reload":
      await reloadProject();
      break;
  }
}

export function mount(element: HTMLElement): void {
  root = element;
  update(current);

  root.addEventListener("click", (event) => {
    const target = event.target as HTMLElement;
    const actionEl = target.closest<HTMLElement>("[data-action]");
    if (actionEl) {
      onAction(actionEl.dataset.action as string).catch(fail);
      return;
    }
    const downloadEl = target.closest<HTMLElement>("[data-download-index]");
    if (downloadEl) {
      const entry = downloads[Number(downloadEl.dataset.downloadIndex)];
      saveFile(entry.name, entry.data);
    }
  });

  root.addEventListener("change", (event) => {
    const target = event.target as HTMLInputElement;
    if (target.id === "table-select") {
      const name = target.value.toUpperCase();
      const table = current.tables.find((t) => t.name === name);
      update(state.selectTable(current, table ? table.name : null));
    } else if (target.id === "fragmentation-type") {
      update(state.selectFragmentType(current, target.value as never));
    } else if (target.id === "fragment-name") {
      current = state.setDraft(current, { name: target.value });
    } else if (target.id === "fragment-site") {
      current = state.setDraft(current, { site: target.value });
    } else if (target.dataset.column) {
      update(state.toggleDraftColumn(current, target.dataset.column));
    } else if (target.dataset.siteField) {
      readSiteCards();
    }
  });

  // Flush the column selection without colliding with browser refresh.
  document.addEventListener("keydown", (event) => {
    if (event.altKey && event.key.toLowerCase() === "r") {
      event.preventDefault();
      update(state.clearDraftSelection(current));
    }
  });
}

if (typeof document !== "undefined") {
  const element = document.getElementById("app");
  if (element) mount(element);
}
