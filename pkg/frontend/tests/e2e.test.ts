// End-to-end wizard flow against the real Python service: upload the
// bundled fixture schema, define the three sites, set the hybrid policy,
// read the validation screen, download the scripts, and check they are
// digest-equal to what the command line produces.

import { createHash } from "node:crypto";
import { spawn, spawnSync, type ChildProcess } from "node:child_process";
import { mkdtempSync, readFileSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join, resolve } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import {
  goNext,
  initialState,
  returnToFragmentation,
  setReport,
  setSchema,
  setSiteCount,
  updateSite,
  type WizardState,
} from "../src/state.js";
import { readZip } from "../src/unzip.js";
import { renderFragmentTree, renderReport } from "../src/views.js";

const REPO_ROOT = resolve(__dirname, "..", "..");
const FIXTURES = join(REPO_ROOT, "tests", "fixtures");
const PORT = 8765 + Math.floor(Math.random() * 200);
const BASE = `http://127.0.0.1:${PORT}`;

let server: ChildProcess;
let workDir: string;

async function waitForServer(): Promise<void> {
  for (let i = 0; i < 60; i++) {
    try {
      const response = await fetch(`${BASE}/api/projects/none`);
      if (response.status === 404) return;
    } catch {
      // not up yet
    }
    await new Promise((r) => setTimeout(r, 250));
  }
  throw new Error("service did not come up");
}

beforeAll(async () => {
  workDir = mkdtempSync(join(tmpdir(), "wizard-e2e-"));
  server = spawn(
    "python3",
    ["-m", "ddbforge.cli", "serve", "--port", String(PORT)],
    { cwd: REPO_ROOT, stdio: "ignore" },
  );
  await waitForServer();
});

afterAll(() => {
  server?.kill();
  rmSync(workDir, { recursive: true, force: true });
});

function sha256(data: Uint8Array): string {
  return createHash("sha256").update(data).digest("hex");
}

const SITES = ["ENIT", "FST", "FSEGT"].map((name) => ({
  name,
  host: "127.0.0.1",
  port: 1521,
  service: name,
  dblink: name,
  user: "ROOT",
  password: "root",
}));

const STUDENT_POLICY = JSON.parse(
  readFileSync(join(FIXTURES, "policy.json"), "utf-8"),
).tables[0];

describe("wizard end-to-end", () => {
  it("walks schema → sites → policy → validation → download, digest-equal to the CLI", async () => {
    const api = new ApiClient(BASE);
    let state: WizardState = initialState();

    // Step 1: schema upload.
    const project = await api.createProject("e2e");
    state = { ...state, projectId: project.id, version: project.version };
    const ddl = readFileSync(join(FIXTURES, "library.sql"), "utf-8");
    const schemaResult = await api.putSchema(project.id, ddl, state.version);
    expect(schemaResult.diagnostics).toEqual([]);
    state = setSchema(state, ddl, schemaResult.tables, schemaResult.version);
    expect(state.tables.map((t) => t.name)).toContain("STUDENT");
    state = goNext(state);
    expect(state.step).toBe("sites");

    // Step 2: three sites.
    state = setSiteCount(state, 3);
    SITES.forEach((site, i) => {
      state = updateSite(state, i, site);
    });
    const topoResult = await api.putTopology(project.id, state.sites, state.version);
    state = { ...state, version: topoResult.version };
    state = goNext(state);
    expect(state.step).toBe("fragmentation");

    // Step 3: the hybrid policy for STUDENT.
    const policyResult = await api.putTablePolicy(
      project.id,
      "STUDENT",
      STUDENT_POLICY,
      state.version,
    );
    state = { ...state, version: policyResult.version };
    state = goNext(state);
    expect(state.step).toBe("validation");

    // Step 4: validation screen.
    const validation = await api.validate(project.id);
    state = setReport(state, validation.report, validation.plan, validation.version);
    expect(validation.report.overall).toBe("valid_with_warnings");

    const reportHtml = renderReport(validation.report);
    const order = [...reportHtml.matchAll(/data-criterion="(\w+)"/g)].map((m) => m[1]);
    expect(order.slice(0, 3)).toEqual(["reconstruction", "completeness", "disjointness"]);

    const treeHtml = renderFragmentTree(state);
    expect(treeHtml).toContain('<li class="col pk">NCE</li>');
    expect(treeHtml).toContain("STUDENT_LIB_FSEGT");
    expect(treeHtml).toContain('class="derived-badge"');

    state = goNext(state);
    expect(state.step).toBe("generation");

    // Step 5: download and compare digests with the CLI output.
    const archive = await api.generate(project.id);
    const entries = await readZip(archive);
    const sqlEntries = entries.filter((e) => e.name.endsWith(".sql"));
    expect(sqlEntries.map((e) => e.name).sort()).toEqual([
      "ENIT_DDB_SCRIPT.sql",
      "FSEGT_DDB_SCRIPT.sql",
      "FST_DDB_SCRIPT.sql",
    ]);

    const cliOut = join(workDir, "cli");
    const cli = spawnSync(
      "python3",
      [
        "-m", "ddbforge.cli", "generate",
        "--schema", join(FIXTURES, "library.sql"),
        "--topology", join(FIXTURES, "topology.json"),
        "--policy", join(FIXTURES, "policy.json"),
        "--out", cliOut,
      ],
      { cwd: REPO_ROOT },
    );
    expect(cli.status).toBe(0);
    for (const entry of sqlEntries) {
      const cliBytes = readFileSync(join(cliOut, entry.name));
      expect(sha256(entry.data)).toBe(sha256(new Uint8Array(cliBytes)));
    }
  });

  it("negative validation navigates back to the fragmentation step", async () => {
    const api = new ApiClient(BASE);
    let state: WizardState = initialState();

    const project = await api.createProject("e2e-negative");
    state = { ...state, projectId: project.id, version: project.version };
    const ddl = readFileSync(join(FIXTURES, "library.sql"), "utf-8");
    const schemaResult = await api.putSchema(project.id, ddl, state.version);
    state = setSchema(state, ddl, schemaResult.tables, schemaResult.version);
    state = goNext(state);
    state = setSiteCount(state, 3);
    SITES.forEach((site, i) => {
      state = updateSite(state, i, site);
    });
    const topoResult = await api.putTopology(project.id, state.sites, state.version);
    state = { ...state, version: topoResult.version };
    state = goNext(state);

    // Overlapping value lists: the service must report a negative verdict.
    const badPolicy = {
      table: "EMPLOYEE",
      mode: "horizontal" as const,
      horizontal: {
        column: "ASSIGNMENT",
        assignments: { ENIT: ["A"], FST: ["A", "B"] },
      },
    };
    const policyResult = await api.putTablePolicy(
      project.id,
      "EMPLOYEE",
      badPolicy,
      state.version,
    );
    state = { ...state, version: policyResult.version };
    state = goNext(state);
    expect(state.step).toBe("validation");

    const validation = await api.validate(project.id);
    state = setReport(state, validation.report, validation.plan, validation.version);
    expect(validation.report.overall).toBe("invalid");

    // Forward progress is blocked; the escape hatch goes back to fragmentation.
    expect(goNext(state).step).toBe("validation");
    state = returnToFragmentation(state);
    expect(state.step).toBe("fragmentation");
  });
});
