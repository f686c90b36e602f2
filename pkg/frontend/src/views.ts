// Pure view functions: state in, HTML string out. Nothing here computes a
// verdict or a fragment — every tree node and report line is rendered from
// what the service returned.

import type { WizardState } from "./state.js";
import { STEPS, canAdvance, stepIndex } from "./state.js";
import type { FragmentNode, Report, TableDoc, Verdict } from "./types.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

const STEP_LABELS: Record<string, string> = {
  schema: "1. Schema",
  sites: "2. Sites",
  fragmentation: "3. Fragmentation",
  validation: "4. Validation",
  generation: "5. Scripts",
};

export function renderStepNav(state: WizardState): string {
  const items = STEPS.map((step) => {
    const classes = ["nav-step"];
    if (step === state.step) classes.push("active");
    if (stepIndex(step) < stepIndex(state.step)) classes.push("done");
    return `<span class="${classes.join(" ")}">${STEP_LABELS[step]}</span>`;
  });
  return `<nav class="steps">${items.join("")}</nav>`;
}

function navButtons(state: WizardState): string {
  const back =
    stepIndex(state.step) > 0
      ? `<button type="button" data-action="back">Back</button>`
      : "";
  const next =
    stepIndex(state.step) < STEPS.length - 1
      ? `<button type="button" data-action="next" ${canAdvance(state) ? "" : "disabled"}>Next</button>`
      : "";
  return `<div class="nav-buttons">${back}${next}</div>`;
}

function errorBanner(state: WizardState): string {
  if (state.stale) {
    return `<div class="banner stale">This project changed in another tab.
      <button type="button" data-action="reload">Reload</button></div>`;
  }
  if (!state.error) return "";
  return `<div class="banner error">${escapeHtml(state.error)}</div>`;
}

export function renderSchemaStep(state: WizardState): string {
  const tables = state.tables
    .map(
      (t) =>
        `<li><strong>${escapeHtml(t.name)}</strong> (${t.columns.length} columns, key: ${t.primary_key.join(", ") || "none"})</li>`,
    )
    .join("");
  return `
    <section class="panel" data-step="schema">
      <h2>Centralized schema</h2>
      <p>Paste or upload the CREATE TABLE script of the database to distribute.</p>
      <textarea id="ddl-input" rows="14" spellcheck="false" placeholder="CREATE TABLE ...">${escapeHtml(state.schemaDdl)}</textarea>
      <div class="row">
        <input type="file" id="ddl-file" accept=".sql,.txt" />
        <button type="button" data-action="upload-schema">Parse schema</button>
      </div>
      <ul class="table-list">${tables}</ul>
    </section>`;
}

export function renderSitesStep(state: WizardState): string {
  const cards = state.sites
    .map(
      (site, i) => `
      <fieldset class="site-card" data-site-index="${i}">
        <legend>Site ${i + 1}</legend>
        <label>Logical name <input data-site-field="name" value="${escapeHtml(site.name)}" /></label>
        <label>Network address <input data-site-field="host" value="${escapeHtml(site.host)}" /></label>
        <label>Port <input data-site-field="port" type="number" value="${site.port}" /></label>
        <label>Service <input data-site-field="service" value="${escapeHtml(site.service)}" /></label>
        <label>DB link name <input data-site-field="dblink" value="${escapeHtml(site.dblink)}" /></label>
        <label>User <input data-site-field="user" value="${escapeHtml(site.user)}" /></label>
        <label>Password <input data-site-field="password" type="password" value="${escapeHtml(site.password)}" /></label>
      </fieldset>`,
    )
    .join("");
  return `
    <section class="panel" data-step="sites">
      <h2>Distribution sites</h2>
      <label>Number of sites
        <input id="site-count" type="number" min="1" max="16" value="${state.siteCount || state.sites.length || ""}" />
      </label>
      <button type="button" data-action="set-site-count">Create site cards</button>
      <div class="site-cards">${cards}</div>
      <button type="button" data-action="save-sites" ${state.sites.length ? "" : "disabled"}>Save sites</button>
    </section>`;
}

function tableOptions(tables: TableDoc[]): string {
  return tables.map((t) => `<option value="${escapeHtml(t.name)}"></option>`).join("");
}

function columnChecklist(state: WizardState, table: TableDoc): string {
  return table.columns
    .map((c) => {
      const checked = state.draft.columns.includes(c.name) ? "checked" : "";
      const pk = table.primary_key.includes(c.name) ? " (key)" : "";
      return `<label class="col-check"><input type="checkbox" data-column="${escapeHtml(c.name)}" ${checked} /> ${escapeHtml(c.name)}${pk}</label>`;
    })
    .join("");
}

function horizontalEditor(state: WizardState, table: TableDoc): string {
  const existing = state.policies[table.name]?.horizontal;
  const columnOptions = table.columns
    .map((c) => {
      const selected = existing?.column === c.name ? "selected" : "";
      return `<option value="${escapeHtml(c.name)}" ${selected}>${escapeHtml(c.name)}</option>`;
    })
    .join("");
  const rows = state.sites
    .map((site) => {
      const values = existing?.assignments?.[site.name]?.join(", ") ?? "";
      return `<tr>
        <td>${escapeHtml(site.name)}</td>
        <td><input data-assignment-site="${escapeHtml(site.name)}" value="${escapeHtml(values)}" placeholder="comma separated values" /></td>
      </tr>`;
    })
    .join("");
  const defaultOptions = ['<option value="">(none)</option>']
    .concat(
      state.sites.map((s) => {
        const selected = existing?.default_site === s.name ? "selected" : "";
        return `<option value="${escapeHtml(s.name)}" ${selected}>${escapeHtml(s.name)}</option>`;
      }),
    )
    .join("");
  return `
    <div class="horizontal-editor">
      <h3>Row assignment by value</h3>
      <label>Fragmentation column <select id="horizontal-column">${columnOptions}</select></label>
      <table class="assignment-grid">
        <thead><tr><th>Site</th><th>Values</th></tr></thead>
        <tbody>${rows}</tbody>
      </table>
      <label>Default (catch-all) site <select id="default-site">${defaultOptions}</select></label>
      <label>Declared domain <input id="declared-domain" value="${escapeHtml(existing?.domain?.join(", ") ?? "")}" placeholder="optional, comma separated" /></label>
    </div>`;
}

function verticalEditor(state: WizardState, table: TableDoc): string {
  const siteOptions = state.sites
    .map((s) => {
      const selected = state.draft.site === s.name ? "selected" : "";
      return `<option value="${escapeHtml(s.name)}" ${selected}>${escapeHtml(s.name)}</option>`;
    })
    .join("");
  const defined = (state.policies[table.name]?.vertical ?? [])
    .map(
      (v) =>
        `<li><code>${escapeHtml(v.name)}</code> (${v.columns.join(", ")}) on ${(v.sites ?? []).join(", ")}</li>`,
    )
    .join("");
  return `
    <div class="vertical-editor">
      <h3>Column fragments</h3>
      <label>Fragment name <input id="fragment-name" value="${escapeHtml(state.draft.name)}" /></label>
      <label>Host site <select id="fragment-site"><option value=""></option>${siteOptions}</select></label>
      <div class="checklist">${columnChecklist(state, table)}</div>
      <div class="row">
        <button type="button" data-action="add-fragment">Add fragment</button>
        <button type="button" data-action="clear-selection" title="Alt+R">Clear selection</button>
      </div>
      <ul class="fragment-list">${defined}</ul>
    </div>`;
}

export function renderFragmentationStep(state: WizardState): string {
  const table = state.tables.find((t) => t.name === state.currentTable) ?? null;
  const typeOptions = ["horizontal", "vertical", "hybrid", "replicate_full", "none"]
    .map(
      (mode) =>
        `<option value="${mode}" ${state.fragmentType === mode ? "selected" : ""}>${mode}</option>`,
    )
    .join("");
  const editors = table
    ? `
      ${state.fragmentType === "horizontal" || state.fragmentType === "hybrid" ? horizontalEditor(state, table) : ""}
      ${state.fragmentType === "vertical" || state.fragmentType === "hybrid" ? verticalEditor(state, table) : ""}
      <button type="button" data-action="save-policy" class="primary">Save table policy</button>`
    : "<p>Select a table to fragment. Tables without a policy stay unfragmented; tables referencing a fragmented parent are co-located automatically.</p>";
  const saved = Object.values(state.policies)
    .map((p) => `<li><strong>${escapeHtml(p.table)}</strong>: ${p.mode}</li>`)
    .join("");
  return `
    <section class="panel" data-step="fragmentation">
      <h2>Fragmentation</h2>
      <label>Table
        <input id="table-select" list="table-names" value="${escapeHtml(state.currentTable ?? "")}" placeholder="start typing a table name" />
        <datalist id="table-names">${tableOptions(state.tables)}</datalist>
      </label>
      <label>Fragmentation type <select id="fragmentation-type">${typeOptions}</select></label>
      ${editors}
      <h3>Defined policies</h3>
      <ul class="policy-list">${saved}</ul>
    </section>`;
}

const LEVEL_BADGES: Record<string, string> = {
  pass: "✓",
  warning: "!",
  error: "✗",
  indeterminate: "?",
};

function renderVerdict(verdict: Verdict): string {
  const messages = verdict.messages
    .map((m) => `<li>${escapeHtml(m)}</li>`)
    .join("");
  return `
    <div class="verdict level-${verdict.level}" data-criterion="${verdict.criterion}">
      <span class="badge">${LEVEL_BADGES[verdict.level]}</span>
      <strong>${verdict.criterion}</strong>: ${verdict.level}
      <ul>${messages}</ul>
    </div>`;
}

export function renderReport(report: Report): string {
  const tables = [...new Set(report.verdicts.map((v) => v.table))];
  const sections = tables
    .map((table) => {
      const verdicts = report.verdicts.filter((v) => v.table === table);
      return `<div class="table-report"><h4>${escapeHtml(table)}</h4>${verdicts.map(renderVerdict).join("")}</div>`;
    })
    .join("");
  return `<div class="report overall-${report.overall}">
    <p class="overall">Overall: <strong>${report.overall}</strong></p>
    ${sections}
  </div>`;
}

/** Fragment tree: sites at the first level, fragments below, column leaves
 * with the primary key highlighted. Derived fragments are display-only. */
export function renderFragmentTree(state: WizardState): string {
  if (!state.plan) return "<p>No plan yet.</p>";
  const bySite = new Map<string, FragmentNode[]>();
  for (const nodes of Object.values(state.plan.table_trees)) {
    for (const node of nodes) {
      const list = bySite.get(node.site) ?? [];
      list.push(node);
      bySite.set(node.site, list);
    }
  }
  const sites = [...bySite.entries()]
    .map(([site, nodes]) => {
      const fragments = nodes
        .map((node) => {
          const columns = node.columns
            .map((c) => {
              const pk = node.primary_key.includes(c);
              return `<li class="col${pk ? " pk" : ""}">${escapeHtml(c)}</li>`;
            })
            .join("");
          const derived = node.kind === "derived" ? ` <em class="derived-badge">derived</em>` : "";
          const replica = node.primary_copy ? "" : ` <em class="replica-badge">replica</em>`;
          return `<li class="fragment kind-${node.kind}"><code>${escapeHtml(node.id)}</code>${derived}${replica}<ul class="columns">${columns}</ul></li>`;
        })
        .join("");
      return `<li class="site"><strong>${escapeHtml(site)}</strong><ul class="fragments">${fragments}</ul></li>`;
    })
    .join("");
  return `<ul class="fragment-tree">${sites}</ul>`;
}

export function renderValidationStep(state: WizardState): string {
  const negative = state.lastReport?.overall === "invalid";
  const fixButton = negative
    ? `<button type="button" data-action="fix-fragmentation" class="primary">Return to fragmentation</button>`
    : "";
  return `
    <section class="panel" data-step="validation">
      <h2>Validation</h2>
      <button type="button" data-action="run-validation">Validate fragmentation</button>
      ${fixButton}
      <div class="validation-grid">
        <div class="tree-panel">
          <h3>Fragment tree</h3>
          ${renderFragmentTree(state)}
        </div>
        <div class="report-panel">
          <h3>Report</h3>
          ${state.lastReport ? renderReport(state.lastReport) : "<p>Not validated yet.</p>"}
        </div>
      </div>
    </section>`;
}

export function renderGenerationStep(state: WizardState): string {
  return `
    <section class="panel" data-step="generation">
      <h2>Script generation</h2>
      <p>One implementation script per site, plus the digest manifest.</p>
      <button type="button" data-action="generate" class="primary">Generate scripts</button>
      <ul id="download-list" class="download-list"></ul>
    </section>`;
}

export function render(state: WizardState): string {
  let body: string;
  switch (state.step) {
    case "schema":
      body = renderSchemaStep(state);
      break;
    case "sites":
      body = renderSitesStep(state);
      break;
    case "fragmentation":
      body = renderFragmentationStep(state);
      break;
    case "validation":
      body = renderValidationStep(state);
      break;
    case "generation":
      body = renderGenerationStep(state);
      break;
  }
  return `${renderStepNav(state)}${errorBanner(state)}${body}${navButtons(state)}`;
}
