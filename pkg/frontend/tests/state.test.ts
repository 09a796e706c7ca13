import { describe, expect, it } from "vitest";

import {
  applyDiagnostics,
  applySelection,
  applyTree,
  badgeOf,
  deriveBadges,
  diagnosticsFor,
  initialState,
  rollupCounts,
  sortForest,
  totalNodes,
} from "../src/state.js";
import type { DiagnosticJson } from "../src/types.js";
import { batch, detail, diag, node } from "./helpers.js";

describe("deriveBadges", () => {
  it("maps diagnostic kinds onto badges", () => {
    const badges = deriveBadges([
      diag("StaleComment", "a"),
      diag("OrphanedComment", "b"),
      diag("Inconsistent", "c"),
    ]);
    expect(badges.get("a")).toBe("stale");
    expect(badges.get("b")).toBe("orphaned");
    expect(badges.get("c")).toBe("inconsistent");
  });

  it("keeps the worst badge when one node has several findings", () => {
    const badges = deriveBadges([
      diag("OrphanedComment", "a"),
      diag("Inconsistent", "a"),
      diag("StaleComment", "a"),
    ]);
    expect(badges.get("a")).toBe("inconsistent");
  });

  it("ignores findings without a node and unknown kinds", () => {
    const badges = deriveBadges([
      diag("GrammarViolation", null),
      diag("BrokenLink", "a"),
    ]);
    expect(badges.size).toBe(0);
  });
});

describe("applyDiagnostics", () => {
  it("replaces the previous batch instead of accumulating", () => {
    const state = initialState();
    applyDiagnostics(state, batch(diag("StaleComment", "a")));
    applyDiagnostics(state, batch(diag("Inconsistent", "b")));
    expect(badgeOf(state, "a")).toBe("clean");
    expect(badgeOf(state, "b")).toBe("inconsistent");
    expect(state.diagnostics).toHaveLength(1);
  });

  it("lands in the same state as one fresh fetch after any batch sequence", () => {
    // Deterministic pseudo-random batch stream.
    let seed = 0x5eed;
    const rand = () => {
      seed = (seed * 1103515245 + 12345) & 0x7fffffff;
      return seed / 0x7fffffff;
    };
    const kinds = ["StaleComment", "OrphanedComment", "Inconsistent", "BrokenLink"];
    const makeBatch = () => {
      const diags: DiagnosticJson[] = [];
      const n = Math.floor(rand() * 6);
      for (let i = 0; i < n; i++) {
        const kind = kinds[Math.floor(rand() * kinds.length)];
        const nodeId = `n${Math.floor(rand() * 4)}`;
        diags.push(diag(kind, nodeId));
      }
      return batch(...diags);
    };

    for (let round = 0; round < 50; round++) {
      const streamed = initialState();
      const batches = Array.from({ length: 1 + Math.floor(rand() * 7) }, makeBatch);
      for (const b of batches) applyDiagnostics(streamed, b);

      const fresh = applyDiagnostics(initialState(), batches[batches.length - 1]);
      expect(streamed.diagnostics).toEqual(fresh.diagnostics);
      expect(Object.fromEntries(streamed.badges)).toEqual(
        Object.fromEntries(fresh.badges),
      );
    }
  });
});

describe("sortForest", () => {
  it("orders by prefix, then numeric path, then position", () => {
    const n1 = node("CS10");
    const n2 = node("CS2");
    const n3 = node("AS1");
    const n4 = node("SP1");
    const sorted = sortForest([n1, n2, n3, n4]).map((n) => n.label.raw);
    expect(sorted).toEqual(["AS1", "CS2", "CS10", "SP1"]);
  });

  it("orders dotted children under their numeric parent path", () => {
    const sorted = sortForest([node("CS1.10"), node("CS1.2"), node("CS1.1")]).map(
      (n) => n.label.raw,
    );
    expect(sorted).toEqual(["CS1.1", "CS1.2", "CS1.10"]);
  });

  it("sorts recursively and leaves the input unmodified", () => {
    const parent = node("CS1", { children: [node("CS1.2"), node("CS1.1")] });
    const sorted = sortForest([parent]);
    expect(sorted[0].children.map((c) => c.label.raw)).toEqual(["CS1.1", "CS1.2"]);
    expect(parent.children.map((c) => c.label.raw)).toEqual(["CS1.2", "CS1.1"]);
  });
});

describe("rollups and totals", () => {
  it("counts descendant badges, excluding the node itself", () => {
    const child1 = node("CS1.1", { id: "c1" });
    const child2 = node("CS1.2", { id: "c2", children: [node("CS1.2.1", { id: "g1" })] });
    const parent = node("CS1", { id: "p", children: [child1, child2] });
    const state = initialState();
    applyDiagnostics(
      state,
      batch(
        diag("StaleComment", "p"),
        diag("StaleComment", "c1"),
        diag("Inconsistent", "g1"),
      ),
    );
    expect(rollupCounts(parent, state)).toEqual({
      stale: 1,
      inconsistent: 1,
      orphaned: 0,
    });
  });

  it("counts every node across files", () => {
    const state = initialState();
    applyTree(state, {
      files: [
        { file: "A.java", counts: {}, roots: [node("CS1", { children: [node("CS1.1")] })] },
        { file: "B.java", counts: {}, roots: [node("AS1")] },
      ],
    });
    expect(totalNodes(state)).toBe(3);
  });
});

describe("selection", () => {
  it("stores the node and captures its verdict", () => {
    const state = initialState();
    const d = detail("CS3", {
      verdict: { outcome: "consistent", explanation: "fine", backendId: "replay" },
    });
    applySelection(state, d);
    expect(state.selectedId).toBe(d.id);
    expect(state.verdicts.get(d.id)?.outcome).toBe("consistent");
    applySelection(state, null);
    expect(state.selectedId).toBeNull();
    expect(state.verdicts.get(d.id)?.outcome).toBe("consistent");
  });

  it("filters diagnostics for a node", () => {
    const state = initialState();
    applyDiagnostics(
      state,
      batch(diag("StaleComment", "x"), diag("OrphanedComment", "y")),
    );
    expect(diagnosticsFor(state, "x")).toHaveLength(1);
    expect(diagnosticsFor(state, "x")[0].kind).toBe("StaleComment");
  });
});
