import { describe, expect, it } from "vitest";

import { formatGap, formatSim, summarizeExport, summaryLine } from "../src/format.js";
import { keyAction } from "../src/keyboard.js";
import { panBy, resetZoom, zoomBy, zoomTransform, ZOOM_MAX } from "../src/zoom.js";

describe("formatters", () => {
  it("shows gaps to exactly three decimals", () => {
    expect(formatGap(0.35)).toBe("0.350");
    expect(formatGap(0.123456)).toBe("0.123");
    expect(formatGap(1)).toBe("1.000");
  });

  it("shows sims to four decimals", () => {
    expect(formatSim(0.95)).toBe("0.9500");
  });
});

describe("summarizeExport", () => {
  const doc = {
    version: 1,
    pairs: [
      {
        pair_id: "1-2",
        patterns: ["text", "color_appearance"],
        questions: [{ question_id: "1-2-q0", correct_index: 0 }, { question_id: "1-2-q1", correct_index: 1 }],
      },
      {
        pair_id: "3-4",
        patterns: ["text"],
        questions: [{ question_id: "3-4-q0", correct_index: 0 }, { question_id: "3-4-q1", correct_index: 0 }],
      },
    ],
  };

  it("counts pairs, questions, and pattern labels", () => {
    const summary = summarizeExport(doc);
    expect(summary.pairs).toBe(2);
    expect(summary.questions).toBe(4);
    expect(summary.histogram).toEqual({ text: 2, color_appearance: 1 });
    const labelTotal = Object.values(summary.histogram).reduce((a, b) => a + b, 0);
    expect(labelTotal).toBe(3);
  });

  it("phrases the one-pair case in the singular", () => {
    expect(summaryLine({ pairs: 1, questions: 2, histogram: {} })).toBe("1 pair / 2 questions");
    expect(summaryLine({ pairs: 2, questions: 4, histogram: {} })).toBe("2 pairs / 4 questions");
  });

  it("rejects a document without pairs", () => {
    expect(() => summarizeExport({ version: 1 })).toThrow(/pairs/);
  });
});

describe("keyboard map", () => {
  it("navigates in both views", () => {
    expect(keyAction("j", "list")).toEqual({ kind: "next" });
    expect(keyAction("ArrowUp", "detail")).toEqual({ kind: "prev" });
    expect(keyAction("Enter", "list")).toEqual({ kind: "open" });
    expect(keyAction("Enter", "detail")).toBeNull();
    expect(keyAction("Escape", "detail")).toEqual({ kind: "back" });
    expect(keyAction("Escape", "list")).toBeNull();
    expect(keyAction("x", "list")).toBeNull();
  });

  it("zooms only in the detail view", () => {
    expect(keyAction("+", "detail")).toEqual({ kind: "zoom", factor: 1.25 });
    expect(keyAction("+", "list")).toBeNull();
    expect(keyAction("0", "detail")).toEqual({ kind: "zoomReset" });
  });
});

describe("shared zoom", () => {
  it("clamps the scale to the allowed range", () => {
    let zoom = resetZoom();
    for (let k = 0; k < 50; k++) {
      zoom = zoomBy(zoom, 1.5);
    }
    expect(zoom.scale).toBe(ZOOM_MAX);
    for (let k = 0; k < 50; k++) {
      zoom = zoomBy(zoom, 0.5);
    }
    expect(zoom.scale).toBe(1);
  });

  it("resets the pan when fully zoomed out", () => {
    let zoom = zoomBy(resetZoom(), 2);
    zoom = panBy(zoom, 30, -10);
    expect(zoom).toEqual({ scale: 2, x: 30, y: -10 });
    zoom = zoomBy(zoom, 0.1);
    expect(zoom).toEqual({ scale: 1, x: 0, y: 0 });
  });

  it("ignores pans at rest and renders one transform for both images", () => {
    const rest = panBy(resetZoom(), 10, 10);
    expect(rest).toEqual({ scale: 1, x: 0, y: 0 });
    expect(zoomTransform({ scale: 2, x: 5, y: -3 })).toBe(
      "translate(5px, -3px) scale(2)",
    );
  });
});
