// Controller: owns the session lifecycle, disables inputs while a solve is
// in flight, and keeps the history and regret-trend panels current.

import { SessionApi } from "./api.js";
import type { HistoryEntry, QueryPayload } from "./types.js";
import { isReady, isFinished } from "./types.js";
import {
  renderError,
  renderHistory,
  renderMmerTrend,
  renderPayload,
  renderPosterior,
} from "./view.js";

export class App {
  private readonly api: SessionApi;
  private sessionId: string | null = null;
  private history: HistoryEntry[] = [];
  private mmerTrend: number[] = [];
  private busy = false;

  constructor(
    private readonly main: HTMLElement,
    private readonly side: HTMLElement,
    baseUrl = "",
  ) {
    this.api = new SessionApi(baseUrl);
  }

  async start(instance: unknown, config: Record<string, unknown> = {}): Promise<void> {
    try {
      const payload = await this.api.createSession(instance, config);
      this.sessionId = payload.session_id;
      this.show(payload);
    } catch (err) {
      this.main.replaceChildren(renderError(err instanceof Error ? err.message : String(err)));
    }
  }

  async resume(sessionId: string): Promise<void> {
    this.sessionId = sessionId;
    try {
      this.show(await this.api.pollUntilReady(sessionId));
    } catch (err) {
      this.main.replaceChildren(renderError(err instanceof Error ? err.message : String(err)));
    }
  }

  private show(payload: QueryPayload): void {
    if (isReady(payload) || isFinished(payload)) {
      if (payload.mmer !== null && this.mmerTrend.length === payload.query_count) {
        this.mmerTrend.push(payload.mmer);
      }
    }
    const view = renderPayload(payload, {
      onPrefer: (choice) => {
        if (isReady(payload)) {
          void this.answer(payload, choice === "A" ? 1 : 0);
        }
      },
    });
    if (this.busy) {
      for (const button of view.querySelectorAll("button")) {
        button.disabled = true;
      }
    }
    this.main.replaceChildren(view);
    this.side.replaceChildren(renderHistory(this.history), renderMmerTrend(this.mmerTrend));
    void this.refreshDiagnostics(payload);
  }

  private async answer(payload: QueryPayload & { status: "ready" }, a: 0 | 1): Promise<void> {
    if (this.busy || this.sessionId === null) {
      return;
    }
    this.busy = true;
    for (const button of this.main.querySelectorAll("button")) {
      button.disabled = true;
    }
    this.history.push({
      queryIndex: payload.query_index,
      x: payload.x,
      y: payload.y,
      answer: a,
    });
    try {
      const next = await this.api.answerAndAwaitNext(this.sessionId, a, payload.query_index);
      this.busy = false;
      this.show(next);
    } catch (err) {
      this.busy = false;
      this.main.replaceChildren(
        renderError(err instanceof Error ? err.message : String(err)),
      );
    }
  }

  private async refreshDiagnostics(payload: QueryPayload): Promise<void> {
    // optional endpoint: quietly skip when the service does not expose it
    if (this.sessionId === null || payload.status === "computing") {
      return;
    }
    try {
      const res = await fetch(`/sessions/${this.sessionId}/diagnostics`);
      if (!res.ok) {
        return;
      }
      const body = (await res.json()) as { posterior_mean_normalized: number[] | null };
      if (body.posterior_mean_normalized) {
        const names = "criteria_names" in payload ? payload.criteria_names : null;
        this.side.appendChild(renderPosterior(body.posterior_mean_normalized, names));
      }
    } catch {
      // diagnostics are cosmetic; never break the answering flow
    }
  }
}

export function bootstrap(): void {
  const main = document.getElementById("main");
  const side = document.getElementById("side");
  const form = document.getElementById("setup-form") as HTMLFormElement | null;
  if (!main || !side || !form) {
    return;
  }
  const app = new App(main, side);
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const textarea = form.querySelector("textarea");
    const seedInput = form.querySelector<HTMLInputElement>("input[name=seed]");
    if (!textarea) {
      return;
    }
    try {
      const instance = JSON.parse(textarea.value);
      const config: Record<string, unknown> = {};
      if (seedInput?.value) {
        config.rng_seed = Number(seedInput.value);
      }
      void app.start(instance, config);
    } catch (err) {
      main.replaceChildren(renderError(`instance is not valid JSON: ${String(err)}`));
    }
  });
}

if (typeof document !== "undefined" && document.getElementById("setup-form")) {
  bootstrap();
}
