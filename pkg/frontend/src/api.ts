/** Typed client for the session service JSON API. */

export type Outcome = "first" | "second" | "tie";

export interface TupleView {
  id: number | string;
  attributes: Record<string, number>;
}

export interface QueryResponse {
  status: "awaiting_answer" | "done";
  seq: number | null;
  first: TupleView | null;
  second: TupleView | null;
}

export interface AnswerResponse {
  state: "awaiting_answer" | "done";
}

export interface ProgressResponse {
  state: "awaiting_answer" | "done";
  tuples_seen: number;
  tuples_pruned: number;
  comparisons_used: number;
  filters_built: number;
  pool_fill: number;
  total: number;
  stopped: boolean;
}

export interface ResultResponse {
  winner: TupleView;
  comparisons: number;
  answer_log: Outcome[];
  stopped_early: boolean;
  tuples_seen: number;
  tuples_pruned: number;
  filters_built: number;
}

export interface StopResponse {
  state: "awaiting_answer" | "done";
  stopped: boolean;
}

export interface SyntheticIn {
  kind: "sphere" | "clusters";
  n: number;
  d: number;
  clusters?: number;
  sigma?: number;
  data_seed?: number;
}

export interface DatasetIn {
  csv_text?: string;
  id_column?: string | null;
  synthetic?: SyntheticIn;
}

export interface SessionConfigIn {
  filter?: "list-qp" | "list-lp" | "pair-qp" | "pair-lp" | "hp-lp" | "hp";
  epsilon?: number;
  delta?: number;
  pool_size?: number;
  pool_frac?: number;
  theory_mode?: boolean;
  seed?: number;
}

export interface CreateSessionRequest {
  dataset: DatasetIn;
  config?: SessionConfigIn;
  ttl_seconds?: number;
}

/** Non-2xx response carrying the service's {code, message} body. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

/** fetch rejected before any response arrived (offline, refused, aborted). */
export class NetworkError extends Error {
  constructor(cause: unknown) {
    super(`network request failed: ${String(cause)}`);
    this.name = "NetworkError";
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class SessionApi {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method, headers: { "content-type": "application/json" } };
    if (body !== undefined) {
      init.body = JSON.stringify(body);
    }
    let resp: Response;
    try {
      resp = await this.fetchImpl(this.baseUrl + path, init);
    } catch (cause) {
      throw new NetworkError(cause);
    }
    if (!resp.ok) {
      let code = "unknown_error";
      let message = `HTTP ${resp.status}`;
      try {
        const payload = (await resp.json()) as { code?: string; message?: string };
        if (payload.code) code = payload.code;
        if (payload.message) message = payload.message;
      } catch {
        // keep the generic message when the body is not JSON
      }
      throw new ApiError(resp.status, code, message);
    }
    return (await resp.json()) as T;
  }

  createSession(req: CreateSessionRequest): Promise<{ id: string }> {
    return this.request("POST", "/sessions", req);
  }

  getQuery(sessionId: string): Promise<QueryResponse> {
    return this.request("GET", `/sessions/${sessionId}/query`);
  }

  postAnswer(sessionId: string, outcome: Outcome, seq?: number | null): Promise<AnswerResponse> {
    const body: { outcome: Outcome; seq?: number } = { outcome };
    if (seq !== undefined && seq !== null) {
      body.seq = seq;
    }
    return this.request("POST", `/sessions/${sessionId}/answer`, body);
  }

  getProgress(sessionId: string): Promise<ProgressResponse> {
    return this.request("GET", `/sessions/${sessionId}/progress`);
  }

  postStop(sessionId: string): Promise<StopResponse> {
    return this.request("POST", `/sessions/${sessionId}/stop`);
  }

  getResult(sessionId: string): Promise<ResultResponse> {
    return this.request("GET", `/sessions/${sessionId}/result`);
  }
}
