// DOM rendering for the comparison workflow. Pure functions from payloads to
// elements; no regret or posterior math happens here, and every number shown
// is the exact JSON value from the API (String(v) round-trips in JS).

import type { HistoryEntry, QueryFinished, QueryPayload, QueryReady } from "./types.js";
import { isFinished, isReady } from "./types.js";

export function formatExact(value: number): string {
  return String(value);
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function criterionLabels(count: number, names: string[] | null): string[] {
  return Array.from({ length: count }, (_, k) => names?.[k] ?? `Criterion ${k + 1}`);
}

/** One labelled column of per-criterion values with proportional bars. */
function performanceColumn(
  title: string,
  values: number[],
  names: string[] | null,
  scale: number,
): HTMLElement {
  const column = el("div", "column");
  column.appendChild(el("h3", "column-title", title));
  const labels = criterionLabels(values.length, names);
  values.forEach((value, k) => {
    const row = el("div", "criterion-row");
    row.appendChild(el("span", "criterion-name", labels[k]));
    const track = el("div", "bar-track");
    const bar = el("div", "bar-fill");
    const width = scale > 0 ? Math.max(0, Math.min(1, value / scale)) : 0;
    bar.style.width = `${(100 * width).toFixed(2)}%`;
    track.appendChild(bar);
    row.appendChild(track);
    row.appendChild(el("span", "criterion-value", formatExact(value)));
    column.appendChild(row);
  });
  return column;
}

export interface QueryHandlers {
  onPrefer: (choice: "A" | "B") => void;
}

/** Side-by-side comparison of the two alternatives with answer buttons. */
export function renderQuery(payload: QueryReady, handlers: QueryHandlers): HTMLElement {
  const root = el("section", "query-view");
  const heading = el("h2", "query-heading", `Query ${payload.query_index + 1}`);
  root.appendChild(heading);
  const meta = el("p", "query-meta");
  meta.textContent =
    payload.mmer === null ? "" : `current minimax expected regret: ${formatExact(payload.mmer)}`;
  root.appendChild(meta);

  const scale = Math.max(...payload.x, ...payload.y, 0);
  const columns = el("div", "columns");
  columns.appendChild(performanceColumn("Alternative A", payload.x, payload.criteria_names, scale));
  columns.appendChild(performanceColumn("Alternative B", payload.y, payload.criteria_names, scale));
  root.appendChild(columns);

  const buttons = el("div", "answer-buttons");
  const preferA = el("button", "prefer-a", "Prefer A");
  const preferB = el("button", "prefer-b", "Prefer B");
  preferA.addEventListener("click", () => handlers.onPrefer("A"));
  preferB.addEventListener("click", () => handlers.onPrefer("B"));
  buttons.appendChild(preferA);
  buttons.appendChild(preferB);
  root.appendChild(buttons);
  return root;
}

export function renderComputing(): HTMLElement {
  const root = el("section", "computing-view");
  root.appendChild(el("div", "spinner"));
  root.appendChild(el("p", undefined, "Selecting the next comparison…"));
  return root;
}

export function renderFinished(payload: QueryFinished): HTMLElement {
  const root = el("section", "finished-view");
  root.appendChild(el("h2", undefined, "Recommendation"));
  const summary = el("p", "finished-summary");
  summary.textContent = `settled after ${payload.query_count} answered ${
    payload.query_count === 1 ? "query" : "queries"
  }`;
  root.appendChild(summary);
  const perf = payload.recommendation.performance;
  const scale = Math.max(...perf, 0);
  root.appendChild(performanceColumn("Recommended solution", perf, payload.criteria_names, scale));
  return root;
}

export function renderError(message: string): HTMLElement {
  const banner = el("section", "error-banner");
  banner.appendChild(el("strong", undefined, "Something went wrong"));
  banner.appendChild(el("p", undefined, message));
  return banner;
}

/** Dispatch on the payload; malformed input gets the error banner, not a crash. */
export function renderPayload(payload: QueryPayload, handlers: QueryHandlers): HTMLElement {
  try {
    if (isReady(payload)) {
      if (!Array.isArray(payload.x) || !Array.isArray(payload.y)) {
        return renderError("query payload is missing performance vectors");
      }
      return renderQuery(payload, handlers);
    }
    if (isFinished(payload)) {
      if (!payload.recommendation?.performance) {
        return renderError("finished payload has no recommendation");
      }
      return renderFinished(payload);
    }
    if (payload.status === "computing") {
      return renderComputing();
    }
    return renderError(`unrecognized payload status: ${String((payload as { status?: unknown }).status)}`);
  } catch (err) {
    return renderError(err instanceof Error ? err.message : String(err));
  }
}

export function renderHistory(entries: readonly HistoryEntry[]): HTMLElement {
  const root = el("aside", "history-panel");
  root.appendChild(el("h3", undefined, "Answered queries"));
  const list = el("ol", "history-list");
  for (const entry of entries) {
    const item = el("li", "history-item");
    item.textContent = `Query ${entry.queryIndex + 1}: preferred ${
      entry.answer === 1 ? "A" : "B"
    }`;
    list.appendChild(item);
  }
  root.appendChild(list);
  return root;
}

/** Inline SVG polyline of the minimax-expected-regret trend. */
export function renderMmerTrend(values: readonly number[]): HTMLElement {
  const root = el("aside", "trend-panel");
  root.appendChild(el("h3", undefined, "Regret trend"));
  const svgNs = "http://www.w3.org/2000/svg";
  const width = 260;
  const height = 80;
  const svg = document.createElementNS(svgNs, "svg");
  svg.setAttribute("viewBox", `0 0 ${width} ${height}`);
  svg.setAttribute("class", "trend-chart");
  if (values.length > 0) {
    const top = Math.max(...values);
    const points = values
      .map((v, i) => {
        const px = values.length === 1 ? 0 : (i / (values.length - 1)) * (width - 8) + 4;
        const py = top > 0 ? height - 6 - (v / top) * (height - 12) : height - 6;
        return `${px.toFixed(1)},${py.toFixed(1)}`;
      })
      .join(" ");
    const line = document.createElementNS(svgNs, "polyline");
    line.setAttribute("points", points);
    line.setAttribute("fill", "none");
    line.setAttribute("stroke", "currentColor");
    svg.appendChild(line);
  }
  root.appendChild(svg);
  const latest = values[values.length - 1];
  root.appendChild(
    el("p", "trend-latest", latest === undefined ? "no data yet" : `latest: ${formatExact(latest)}`),
  );
  return root;
}

/** Posterior-mean bar chart for the diagnostics panel. */
export function renderPosterior(means: readonly number[], names: string[] | null): HTMLElement {
  const root = el("aside", "posterior-panel");
  root.appendChild(el("h3", undefined, "Estimated criterion weights"));
  const labels = criterionLabels(means.length, names);
  means.forEach((value, k) => {
    const row = el("div", "criterion-row");
    row.appendChild(el("span", "criterion-name", labels[k]));
    const track = el("div", "bar-track");
    const bar = el("div", "bar-fill posterior");
    bar.style.width = `${(100 * Math.max(0, Math.min(1, value))).toFixed(2)}%`;
    track.appendChild(bar);
    row.appendChild(track);
    row.appendChild(el("span", "criterion-value", formatExact(value)));
    root.appendChild(row);
  });
  return root;
}
