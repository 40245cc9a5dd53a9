/** Session state machine: strictly sequential, one answer per displayed query. */

import {
  ApiError,
  CreateSessionRequest,
  NetworkError,
  Outcome,
  ProgressResponse,
  QueryResponse,
  ResultResponse,
  SessionApi,
} from "./api.js";

export type Phase = "loading" | "awaiting_answer" | "submitting" | "done" | "error";

export interface SessionState {
  phase: Phase;
  /** The query currently shown; raw payload from GET /query, never recomputed. */
  query: QueryResponse | null;
  progress: ProgressResponse | null;
  result: ResultResponse | null;
  /** Recoverable rejection from the service (e.g. a tie on a tie-free session). */
  notice: string | null;
  /** Transport failure banner; refresh() retries and clears it. */
  errorMessage: string | null;
}

export type Listener = (state: SessionState) => void;

function errorText(e: unknown): string {
  if (e instanceof NetworkError) {
    return "network failure, your progress is safe; retry when back online";
  }
  if (e instanceof ApiError) {
    return `${e.code}: ${e.message}`;
  }
  return String(e);
}

export class SessionController {
  private state: SessionState = {
    phase: "loading",
    query: null,
    progress: null,
    result: null,
    notice: null,
    errorMessage: null,
  };
  private busy = false;
  private listeners = new Set<Listener>();

  constructor(
    private readonly api: SessionApi,
    readonly sessionId: string,
  ) {}

  /** Create the server-side session and load its first query. */
  static async create(api: SessionApi, req: CreateSessionRequest): Promise<SessionController> {
    const { id } = await api.createSession(req);
    const controller = new SessionController(api, id);
    await controller.refresh();
    return controller;
  }

  getState(): SessionState {
    return this.state;
  }

  subscribe(listener: Listener): () => void {
    this.listeners.add(listener);
    listener(this.state);
    return () => this.listeners.delete(listener);
  }

  private setState(patch: Partial<SessionState>): void {
    this.state = { ...this.state, ...patch };
    for (const listener of this.listeners) {
      listener(this.state);
    }
  }

  /** Pull query + progress (+ result when done) into the state. */
  private async sync(): Promise<void> {
    const progress = await this.api.getProgress(this.sessionId);
    const query = await this.api.getQuery(this.sessionId);
    if (query.status === "done") {
      const result = await this.api.getResult(this.sessionId);
      this.setState({ phase: "done", query: null, progress, result, errorMessage: null });
    } else {
      this.setState({ phase: "awaiting_answer", query, progress, errorMessage: null });
    }
  }

  /** Re-read the server state; also the retry action for the error banner. */
  async refresh(): Promise<void> {
    if (this.busy) {
      return;
    }
    this.busy = true;
    try {
      await this.sync();
    } catch (e) {
      this.setState({ phase: "error", errorMessage: errorText(e) });
    } finally {
      this.busy = false;
    }
  }

  /**
   * Answer the displayed query. Returns false when nothing was sent (no
   * pending query, or another request is in flight). A stale-seq conflict
   * (double submission) refreshes silently; a semantic rejection keeps the
   * query and surfaces a notice; a transport failure keeps the query and
   * raises the retry banner.
   */
  async submit(outcome: Outcome): Promise<boolean> {
    if (this.busy || this.state.phase !== "awaiting_answer" || this.state.query === null) {
      return false;
    }
    this.busy = true;
    this.setState({ phase: "submitting", notice: null });
    try {
      await this.api.postAnswer(this.sessionId, outcome, this.state.query.seq);
    } catch (e) {
      if (e instanceof ApiError && e.status === 409) {
        // already answered or finished elsewhere: fall through to re-sync
      } else if (e instanceof ApiError && e.status === 422) {
        this.setState({ notice: e.message });
      } else {
        this.setState({ phase: "awaiting_answer", errorMessage: errorText(e) });
        this.busy = false;
        return false;
      }
    }
    try {
      await this.sync();
    } catch (e) {
      this.setState({ phase: "error", errorMessage: errorText(e) });
    } finally {
      this.busy = false;
    }
    return true;
  }

  /**
   * Stop scanning new tuples. The service may still ask a few final
   * comparisons to pick the recommendation from what was retained.
   */
  async stop(): Promise<boolean> {
    if (this.busy) {
      return false;
    }
    this.busy = true;
    this.setState({ phase: "submitting", notice: null });
    try {
      await this.api.postStop(this.sessionId);
      await this.sync();
      return true;
    } catch (e) {
      this.setState({
        phase: this.state.result === null ? "awaiting_answer" : "done",
        errorMessage: errorText(e),
      });
      return false;
    } finally {
      this.busy = false;
    }
  }
}
