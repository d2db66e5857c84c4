// Typed client for the session service HTTP API.  Every term string shown in
// the UI originates from one of these responses; the client never computes
// term algebra.

export interface SessionInfo {
  id: string;
  revision: number;
  rules: string[];
}

export interface RuleInfo {
  name: string;
  description: string;
  chains: number;
}

export interface TermResponse {
  revision: number;
  term: { ascii: string };
}

export interface CandidateInfo {
  index: number;
  summand: number;
  spans: number[][];
  renderings: Record<string, string>;
}

export interface CandidatePage {
  revision: number;
  rule: string;
  truncated: boolean;
  candidates: CandidateInfo[];
}

export interface RenderResponse {
  revision: number;
  format: string;
  rendered: string;
}

export interface HistoryEntry {
  rule: string;
  summand: number;
  candidate: number;
  revision: number;
  term: string;
}

export interface HistoryResponse {
  revision: number;
  base: string;
  entries: HistoryEntry[];
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
    readonly revision?: number,
  ) {
    super(message);
  }
}

export interface ApiClient {
  createSession(rulesFile?: string): Promise<SessionInfo>;
  submitTerm(id: string, term: string): Promise<TermResponse>;
  rules(id: string): Promise<{ revision: number; rules: RuleInfo[] }>;
  candidates(id: string, rule: string, formats: string[]): Promise<CandidatePage>;
  apply(id: string, rule: string, candidate: number, revision: number): Promise<TermResponse>;
  undo(id: string): Promise<TermResponse>;
  render(id: string, format: string): Promise<RenderResponse>;
  history(id: string): Promise<HistoryResponse>;
}

type FetchLike = typeof fetch;

export class Client implements ApiClient {
  constructor(
    private readonly base: string,
    private readonly fetchFn: FetchLike = fetch,
  ) {}

  private async call<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await this.fetchFn(this.base + path, {
      method,
      headers: { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const data = (await response.json()) as Record<string, unknown>;
    if (!response.ok) {
      const error = (data.error ?? {}) as { code?: string; message?: string };
      throw new ApiError(
        response.status,
        error.code ?? "unknown",
        error.message ?? response.statusText,
        typeof data.revision === "number" ? data.revision : undefined,
      );
    }
    return data as T;
  }

  createSession(rulesFile?: string): Promise<SessionInfo> {
    return this.call("POST", "/sessions", rulesFile ? { rules_file: rulesFile } : {});
  }

  submitTerm(id: string, term: string): Promise<TermResponse> {
    return this.call("POST", `/sessions/${id}/term`, { term });
  }

  rules(id: string): Promise<{ revision: number; rules: RuleInfo[] }> {
    return this.call("GET", `/sessions/${id}/rules`);
  }

  candidates(id: string, rule: string, formats: string[]): Promise<CandidatePage> {
    const query = new URLSearchParams({ rule, format: formats.join(",") });
    return this.call("GET", `/sessions/${id}/candidates?${query}`);
  }

  apply(id: string, rule: string, candidate: number, revision: number): Promise<TermResponse> {
    return this.call("POST", `/sessions/${id}/apply`, { rule, candidate, revision });
  }

  undo(id: string): Promise<TermResponse> {
    return this.call("POST", `/sessions/${id}/undo`);
  }

  render(id: string, format: string): Promise<RenderResponse> {
    return this.call("GET", `/sessions/${id}/render?format=${format}`);
  }

  history(id: string): Promise<HistoryResponse> {
    return this.call("GET", `/sessions/${id}/history`);
  }
}
