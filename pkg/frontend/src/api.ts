// Thin typed client for the session service, with polling for the
// long-running solves behind the answer endpoint.

import type { AnswerAccepted, QueryPayload } from "./types.js";

export class ConflictError extends Error {
  constructor(detail: string) {
    super(detail);
    this.name = "ConflictError";
  }
}

export interface PollOptions {
  intervalMs?: number;
  timeoutMs?: number;
}

const DEFAULT_INTERVAL_MS = 500;
const DEFAULT_TIMEOUT_MS = 5 * 60 * 1000;

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const res = await fetch(url, init);
  if (res.status === 409) {
    const body = await res.json().catch(() => ({ detail: "conflict" }));
    throw new ConflictError(String((body as { detail?: string }).detail ?? "conflict"));
  }
  if (!res.ok) {
    throw new Error(`${init?.method ?? "GET"} ${url} failed: ${res.status}`);
  }
  return (await res.json()) as T;
}

export class SessionApi {
  constructor(private readonly baseUrl: string = "") {}

  createSession(instance: unknown, config: Record<string, unknown> = {}): Promise<QueryPayload> {
    return request<QueryPayload>(`${this.baseUrl}/sessions`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ instance, config }),
    });
  }

  getQuery(sessionId: string): Promise<QueryPayload> {
    return request<QueryPayload>(`${this.baseUrl}/sessions/${sessionId}/query`);
  }

  // Answer convention: choosing the left column (the incumbent x) means a=1.
  postAnswer(sessionId: string, a: 0 | 1, queryIndex?: number): Promise<AnswerAccepted> {
    return request<AnswerAccepted>(`${this.baseUrl}/sessions/${sessionId}/answer`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(queryIndex === undefined ? { a } : { a, query_index: queryIndex }),
    });
  }

  getTrace(sessionId: string): Promise<{ session_id: string; events: unknown[] }> {
    return request(`${this.baseUrl}/sessions/${sessionId}/trace`);
  }

  /** Poll the query endpoint until the service leaves the computing state. */
  async pollUntilReady(sessionId: string, opts: PollOptions = {}): Promise<QueryPayload> {
    const interval = opts.intervalMs ?? DEFAULT_INTERVAL_MS;
    const deadline = Date.now() + (opts.timeoutMs ?? DEFAULT_TIMEOUT_MS);
    for (;;) {
      const payload = await this.getQuery(sessionId);
      if (payload.status !== "computing") {
        return payload;
      }
      if (Date.now() > deadline) {
        throw new Error(`session ${sessionId} still computing after timeout`);
      }
      await sleep(interval);
    }
  }

  /** Submit an answer and poll to the next query; on a double-submit
   * conflict the current state is refetched instead of failing the UI. */
  async answerAndAwaitNext(
    sessionId: string,
    a: 0 | 1,
    queryIndex: number,
    opts: PollOptions = {},
  ): Promise<QueryPayload> {
    try {
      await this.postAnswer(sessionId, a, queryIndex);
    } catch (err) {
      if (!(err instanceof ConflictError)) {
        throw err;
      }
    }
    return this.pollUntilReady(sessionId, opts);
  }
}

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}
