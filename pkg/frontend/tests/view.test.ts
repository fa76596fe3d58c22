import { describe, expect, it, vi } from "vitest";

import type { QueryFinished, QueryPayload, QueryReady } from "../src/types.js";
import {
  criterionLabels,
  formatExact,
  renderFinished,
  renderHistory,
  renderMmerTrend,
  renderPayload,
  renderPosterior,
  renderQuery,
} from "../src/view.js";

const READY: QueryReady = {
  status: "ready",
  session_id: "s1",
  query_index: 0,
  query_count: 0,
  mmer: 0.004172103,
  initial_mmer: 0.004172103,
  criteria_names: null,
  x: [0.40000000001, 0.1, 0.25],
  y: [0.2, 0.5000000000000001, 0.3],
};

const FINISHED: QueryFinished = {
  status: "finished",
  session_id: "s1",
  query_count: 4,
  mmer: 0.0001,
  initial_mmer: 0.01,
  criteria_names: ["cost", "risk"],
  recommendation: { decision: [1, 0, 1], performance: [0.31, 0.22] },
};

function values(root: HTMLElement): number[] {
  return Array.from(root.querySelectorAll(".criterion-value")).map((node) =>
    Number(node.textContent),
  );
}

describe("renderQuery", () => {
  it("shows one paired bar row per criterion in each column", () => {
    const view = renderQuery(READY, { onPrefer: () => {} });
    const columns = view.querySelectorAll(".column");
    expect(columns).toHaveLength(2);
    for (const column of columns) {
      expect(column.querySelectorAll(".criterion-row")).toHaveLength(3);
      expect(column.querySelectorAll(".bar-fill")).toHaveLength(3);
    }
  });

  it("renders five paired bars for a five-criterion payload", () => {
    const payload = { ...READY, x: [0.1, 0.2, 0.3, 0.4, 0.5], y: [0.5, 0.4, 0.3, 0.2, 0.1] };
    const view = renderQuery(payload, { onPrefer: () => {} });
    for (const column of view.querySelectorAll(".column")) {
      expect(column.querySelectorAll(".bar-fill")).toHaveLength(5);
    }
  });

  it("displays every number exactly as the payload carries it", () => {
    const view = renderQuery(READY, { onPrefer: () => {} });
    const shown = values(view);
    expect(shown).toEqual([...READY.x, ...READY.y]);
    // text round-trips to the identical float
    const texts = Array.from(view.querySelectorAll(".criterion-value")).map(
      (node) => node.textContent,
    );
    expect(texts).toEqual([...READY.x, ...READY.y].map(formatExact));
  });

  it("wires the answer buttons to the handler", () => {
    const onPrefer = vi.fn();
    const view = renderQuery(READY, { onPrefer });
    (view.querySelector(".prefer-a") as HTMLButtonElement).click();
    (view.querySelector(".prefer-b") as HTMLButtonElement).click();
    expect(onPrefer.mock.calls).toEqual([["A"], ["B"]]);
  });

  it("falls back to numbered criterion labels", () => {
    expect(criterionLabels(2, null)).toEqual(["Criterion 1", "Criterion 2"]);
    expect(criterionLabels(2, ["speed"])).toEqual(["speed", "Criterion 2"]);
  });
});

describe("renderPayload", () => {
  it("shows the recommendation screen for finished sessions", () => {
    const view = renderPayload(FINISHED, { onPrefer: () => {} });
    expect(view.className).toBe("finished-view");
    expect(values(view)).toEqual(FINISHED.recommendation.performance);
    expect(view.textContent).toContain("4 answered queries");
  });

  it("shows a spinner while computing", () => {
    const view = renderPayload(
      { status: "computing", session_id: "s1", query_count: 1 },
      { onPrefer: () => {} },
    );
    expect(view.querySelector(".spinner")).not.toBeNull();
  });

  it("renders an error banner for malformed payloads instead of crashing", () => {
    const broken = { status: "ready", session_id: "s1" } as unknown as QueryPayload;
    const view = renderPayload(broken, { onPrefer: () => {} });
    expect(view.className).toBe("error-banner");

    const unknown = { status: "???" } as unknown as QueryPayload;
    expect(renderPayload(unknown, { onPrefer: () => {} }).className).toBe("error-banner");
  });

  it("renders a banner when the finished payload lacks a recommendation", () => {
    const broken = { ...FINISHED, recommendation: undefined } as unknown as QueryPayload;
    expect(renderPayload(broken, { onPrefer: () => {} }).className).toBe("error-banner");
  });
});

describe("side panels", () => {
  it("lists answered queries", () => {
    const view = renderHistory([
      { queryIndex: 0, x: [1], y: [0], answer: 1 },
      { queryIndex: 1, x: [1], y: [0], answer: 0 },
    ]);
    const items = view.querySelectorAll(".history-item");
    expect(items).toHaveLength(2);
    expect(items[1]?.textContent).toContain("preferred B");
  });

  it("draws one trend point per recorded regret value", () => {
    const view = renderMmerTrend([0.01, 0.004, 0.001]);
    const line = view.querySelector("polyline");
    expect(line?.getAttribute("points")?.split(" ")).toHaveLength(3);
    expect(view.textContent).toContain(formatExact(0.001));
  });

  it("renders posterior means with exact values", () => {
    const view = renderPosterior([0.6, 0.4], ["a", "b"]);
    expect(values(view)).toEqual([0.6, 0.4]);
  });
});
