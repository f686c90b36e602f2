// Thin client over the ddbforge HTTP API. Every call returns the parsed
// body or throws ApiError carrying the status and the server's diagnostics,
// so callers can surface them inline. A 409 marks the local version token
// as stale; the app reacts with a reload prompt.

import type {
  Diagnostic,
  PlanDoc,
  ProjectSummary,
  Report,
  SiteDraft,
  TableDoc,
  TablePolicyDoc,
} from "./types.js";

export class ApiError extends Error {
  status: number;
  diagnostics: Diagnostic[];
  stale: boolean;

  constructor(status: number, message: string, diagnostics: Diagnostic[] = []) {
    super(message);
    this.status = status;
    this.diagnostics = diagnostics;
    this.stale = status === 409;
  }
}

async function parseError(response: Response): Promise<ApiError> {
  let message = `request failed with status ${response.status}`;
  let diagnostics: Diagnostic[] = [];
  try {
    const body = await response.json();
    if (typeof body.error === "string") message = body.error;
    if (Array.isArray(body.diagnostics)) diagnostics = body.diagnostics;
  } catch {
    // keep the generic message for non-JSON bodies
  }
  return new ApiError(response.status, message, diagnostics);
}

export class ApiClient {
  constructor(private baseUrl: string = "") {}

  private url(path: string, version?: number): string {
    const suffix = version === undefined ? "" : `?version=${version}`;
    return `${this.baseUrl}${path}${suffix}`;
  }

  private async json<T>(response: Response): Promise<T> {
    if (!response.ok) throw await parseError(response);
    return (await response.json()) as T;
  }

  async createProject(name: string): Promise<ProjectSummary> {
    const response = await fetch(this.url("/api/projects"), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ name }),
    });
    return this.json(response);
  }

  async getProject(id: string): Promise<ProjectSummary> {
    return this.json(await fetch(this.url(`/api/projects/${id}`)));
  }

  async putSchema(
    id: string,
    ddl: string,
    version?: number,
  ): Promise<{ diagnostics: Diagnostic[]; version: number; tables: TableDoc[] }> {
    const response = await fetch(this.url(`/api/projects/${id}/schema`, version), {
      method: "PUT",
      headers: { "content-type": "text/plain" },
      body: ddl,
    });
    return this.json(response);
  }

  async putTopology(
    id: string,
    sites: SiteDraft[],
    version?: number,
  ): Promise<{ diagnostics: Diagnostic[]; version: number }> {
    const response = await fetch(this.url(`/api/projects/${id}/topology`, version), {
      method: "PUT",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ sites }),
    });
    return this.json(response);
  }

  async putTablePolicy(
    id: string,
    table: string,
    policy: TablePolicyDoc,
    version?: number,
  ): Promise<{ version: number; policy: { tables: TablePolicyDoc[] } }> {
    const response = await fetch(
      this.url(`/api/projects/${id}/policy/tables/${table}`, version),
      {
        method: "PUT",
        headers: { "content-type": "application/json" },
        body: JSON.stringify(policy),
      },
    );
    return this.json(response);
  }

  async validate(id: string): Promise<{ report: Report; version: number; plan: PlanDoc }> {
    const response = await fetch(this.url(`/api/projects/${id}/validate`), { method: "POST" });
    return this.json(response);
  }

  async plan(id: string): Promise<PlanDoc> {
    const response = await fetch(this.url(`/api/projects/${id}/plan`), { method: "POST" });
    return this.json(response);
  }

  async generate(id: string): Promise<ArrayBuffer> {
    const response = await fetch(this.url(`/api/projects/${id}/generate`), { method: "POST" });
    if (!response.ok) throw await parseError(response);
    return response.arrayBuffer();
  }

  async simulate(
    id: string,
    body: { data?: unknown; seed?: number; rows?: number },
  ): Promise<{ round_trip_ok: boolean; fragments: Record<string, number> }> {
    const response = await fetch(this.url(`/api/projects/${id}/simulate`), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    return this.json(response);
  }
}
