/** Service client. HttpClient talks to a live service; FixtureClient replays
 * recorded request/response fixtures so every view renders without a model. */

import type { Assessment, CaseList, Explanation, Health } from "./types.js";

export interface Client {
  health(): Promise<Health>;
  listCases(): Promise<CaseList>;
  assess(caseId: string): Promise<Assessment>;
  explanation(caseId: string, view: string): Promise<Explanation>;
}

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
    public diagnosticId?: string,
  ) {
    super(message);
  }
}

async function parseOrThrow<T>(res: Response): Promise<T> {
  const body = await res.json();
  if (!res.ok) {
    throw new ApiError(res.status, body.code ?? "unknown", body.message ?? "request failed",
      body.diagnostic_id);
  }
  return body as T;
}

export class HttpClient implements Client {
  constructor(private baseUrl: string = "") {}

  health(): Promise<Health> {
    return fetch(`${this.baseUrl}/healthz`).then((r) => parseOrThrow<Health>(r));
  }

  listCases(): Promise<CaseList> {
    return fetch(`${this.baseUrl}/v1/cases`).then((r) => parseOrThrow<CaseList>(r));
  }

  assess(caseId: string): Promise<Assessment> {
    return fetch(`${this.baseUrl}/v1/cases/${caseId}/assess`, { method: "POST" }).then(
      (r) => parseOrThrow<Assessment>(r),
    );
  }

  explanation(caseId: string, view: string): Promise<Explanation> {
    return fetch(`${this.baseUrl}/v1/cases/${caseId}/explanation?view=${view}`).then(
      (r) => parseOrThrow<Explanation>(r),
    );
  }
}

/** One entry of fixtures/service/fixtures.json. */
export interface FixtureEntry {
  name: string;
  method: string;
  path: string;
  status: number;
  body_b64: string;
}

export interface FixtureDoc {
  case_ids: string[];
  requests: FixtureEntry[];
}

function decodeBody(entry: FixtureEntry): unknown {
  // atob exists in browsers and in node >= 16; recorded bodies are ASCII JSON
  return JSON.parse(atob(entry.body_b64));
}

export class FixtureClient implements Client {
  constructor(private doc: FixtureDoc) {}

  private replay<T>(method: string, path: string): Promise<T> {
    const entry = this.doc.requests.find(
      (r) => r.method === method && r.path === path,
    );
    if (!entry) {
      return Promise.reject(new ApiError(404, "no_fixture", `${method} ${path} not recorded`));
    }
    const body = decodeBody(entry) as T & { code?: string; message?: string };
    if (entry.status >= 400) {
      return Promise.reject(
        new ApiError(entry.status, body.code ?? "unknown", body.message ?? "error"),
      );
    }
    return Promise.resolve(body as T);
  }

  health(): Promise<Health> {
    return this.replay("GET", "/healthz");
  }

  listCases(): Promise<CaseList> {
    // the recorded sequence contains several listings; replay the final state
    const entries = this.doc.requests.filter(
      (r) => r.method === "GET" && r.path === "/v1/cases",
    );
    const last = entries[entries.length - 1];
    if (!last) return Promise.reject(new ApiError(404, "no_fixture", "no case listing recorded"));
    return Promise.resolve(decodeBody(last) as CaseList);
  }

  assess(caseId: string): Promise<Assessment> {
    return this.replay("POST", `/v1/cases/${caseId}/assess`);
  }

  explanation(caseId: string, view: string): Promise<Explanation> {
    return this.replay("GET", `/v1/cases/${caseId}/explanation?view=${view}`);
  }
}
