import { afterEach, describe, expect, it, vi } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";

interface Recorded {
  url: string;
  method?: string;
  body?: unknown;
  contentType?: string;
}

function stubFetch(status: number, body: unknown): Recorded[] {
  const calls: Recorded[] = [];
  vi.stubGlobal(
    "fetch",
    async (url: string, init?: RequestInit): Promise<Response> => {
      calls.push({
        url,
        method: init?.method,
        body: init?.body,
        contentType: (init?.headers as Record<string, string>)?.["content-type"],
      });
      return new Response(JSON.stringify(body), {
        status,
        headers: { "content-type": "application/json" },
      });
    },
  );
  return calls;
}

afterEach(() => vi.unstubAllGlobals());

describe("ApiClient", () => {
  it("creates projects", async () => {
    const calls = stubFetch(200, { id: "p1", name: "x", version: 0 });
    const api = new ApiClient("http://test");
    const project = await api.createProject("x");
    expect(project.id).toBe("p1");
    expect(calls[0].url).toBe("http://test/api/projects");
    expect(calls[0].method).toBe("POST");
  });

  it("sends DDL as plain text with the version token", async () => {
    const calls = stubFetch(200, { diagnostics: [], version: 1, tables: [] });
    const api = new ApiClient("");
    await api.putSchema("p1", "CREATE TABLE X (A NUMBER);", 0);
    expect(calls[0].url).toBe("/api/projects/p1/schema?version=0");
    expect(calls[0].contentType).toBe("text/plain");
    expect(calls[0].body).toContain("CREATE TABLE X");
  });

  it("upserts a table policy at the table-scoped path", async () => {
    const calls = stubFetch(200, { version: 2, policy: { tables: [] } });
    const api = new ApiClient("");
    await api.putTablePolicy("p1", "STUDENT", { table: "STUDENT", mode: "none" }, 1);
    expect(calls[0].url).toBe("/api/projects/p1/policy/tables/STUDENT?version=1");
    expect(JSON.parse(calls[0].body as string).mode).toBe("none");
  });

  it("marks 409 responses as stale for the reload prompt", async () => {
    stubFetch(409, { error: "stale version; reload the project" });
    const api = new ApiClient("");
    const error = await api.putTopology("p1", [], 0).catch((e) => e);
    expect(error).toBeInstanceOf(ApiError);
    expect(error.stale).toBe(true);
    expect(error.message).toContain("stale");
  });

  it("carries structured diagnostics out of 422 responses", async () => {
    stubFetch(422, {
      error: "policy rejected",
      diagnostics: [{ severity: "error", code: "policy", message: "unknown column NOPE" }],
    });
    const api = new ApiClient("");
    const error = await api
      .putTablePolicy("p1", "STUDENT", { table: "STUDENT", mode: "none" })
      .catch((e) => e);
    expect(error.status).toBe(422);
    expect(error.diagnostics[0].message).toContain("NOPE");
  });
});
