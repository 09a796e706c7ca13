/** View state and the pure update functions behind the UI.
 *
 * Badges are always derived from the latest diagnostics payload, never
 * accumulated, so the state after any sequence of event batches equals
 * the state rebuilt from one fresh /api/diagnostics fetch.
 */

import type {
  Badge,
  DiagnosticJson,
  DiagnosticsPayload,
  FileEntryJson,
  NodeDetailJson,
  StatusPayload,
  TreeNodeJson,
  TreePayload,
  VerdictJson,
} from "./types.js";

export interface AppState {
  status: StatusPayload | null;
  files: FileEntryJson[];
  diagnostics: DiagnosticJson[];
  badges: Map<string, Badge>;
  verdicts: Map<string, VerdictJson>;
  selected: NodeDetailJson | null;
  selectedId: string | null;
  connected: boolean;
}

export function initialState(): AppState {
  return {
    status: null,
    files: [],
    diagnostics: [],
    badges: new Map(),
    verdicts: new Map(),
    selected: null,
    selectedId: null,
    connected: true,
  };
}

const BADGE_BY_KIND: Record<string, Badge> = {
  Inconsistent: "inconsistent",
  StaleComment: "stale",
  OrphanedComment: "orphaned",
};

const BADGE_RANK: Record<Badge, number> = {
  clean: 0,
  orphaned: 1,
  stale: 2,
  inconsistent: 3,
};

/** Per-node badges from one full diagnostics set; worst kind wins. */
export function deriveBadges(diagnostics: DiagnosticJson[]): Map<string, Badge> {
  const badges = new Map<string, Badge>();
  for (const d of diagnostics) {
    if (!d.nodeId) continue;
    const badge = BADGE_BY_KIND[d.kind];
    if (!badge) continue;
    const current = badges.get(d.nodeId) ?? "clean";
    if (BADGE_RANK[badge] > BADGE_RANK[current]) {
      badges.set(d.nodeId, badge);
    }
  }
  return badges;
}

export function badgeOf(state: AppState, nodeId: string): Badge {
  return state.badges.get(nodeId) ?? "clean";
}

/** Replace the diagnostic-derived slice of the state with one batch. */
export function applyDiagnostics(state: AppState, payload: DiagnosticsPayload): AppState {
  state.diagnostics = payload.diagnostics;
  state.badges = deriveBadges(payload.diagnostics);
  return state;
}

export function applyStatus(state: AppState, status: StatusPayload): AppState {
  state.status = status;
  return state;
}

export function applyTree(state: AppState, tree: TreePayload): AppState {
  state.files = tree.files.map((entry) => ({
    ...entry,
    roots: sortForest(entry.roots),
  }));
  return state;
}

export function applyVerdict(state: AppState, nodeId: string, verdict: VerdictJson): AppState {
  state.verdicts.set(nodeId, verdict);
  return state;
}

export function applySelection(state: AppState, detail: NodeDetailJson | null): AppState {
  state.selected = detail;
  state.selectedId = detail ? detail.id : null;
  if (detail?.verdict) {
    state.verdicts.set(detail.id, detail.verdict);
  }
  return state;
}

export function setConnected(state: AppState, connected: boolean): AppState {
  state.connected = connected;
  return state;
}

function compareNodes(a: TreeNodeJson, b: TreeNodeJson): number {
  if (a.label.prefix !== b.label.prefix) {
    return a.label.prefix < b.label.prefix ? -1 : 1;
  }
  const pa = a.label.path;
  const pb = b.label.path;
  for (let i = 0; i < Math.max(pa.length, pb.length); i++) {
    const da = pa[i] ?? -1;
    const db = pb[i] ?? -1;
    if (da !== db) return da - db;
  }
  return a.anchors[0].range.start - b.anchors[0].range.start;
}

/** Order a forest by label prefix, then numeric path, then position. */
export function sortForest(roots: TreeNodeJson[]): TreeNodeJson[] {
  return roots
    .map((node) => ({ ...node, children: sortForest(node.children) }))
    .sort(compareNodes);
}

export interface Rollup {
  stale: number;
  inconsistent: number;
  orphaned: number;
}

/** Badge counts over a node's descendants (the node itself excluded). */
export function rollupCounts(node: TreeNodeJson, state: AppState): Rollup {
  const out: Rollup = { stale: 0, inconsistent: 0, orphaned: 0 };
  const walk = (children: TreeNodeJson[]) => {
    for (const child of children) {
      const badge = badgeOf(state, child.id);
      if (badge !== "clean") out[badge] += 1;
      walk(child.children);
    }
  };
  walk(node.children);
  return out;
}

export function totalNodes(state: AppState): number {
  let total = 0;
  const walk = (nodes: TreeNodeJson[]) => {
    for (const node of nodes) {
      total += 1;
      walk(node.children);
    }
  };
  for (const entry of state.files) walk(entry.roots);
  return total;
}

/** Diagnostics attached to one node, in payload order. */
export function diagnosticsFor(state: AppState, nodeId: string): DiagnosticJson[] {
  return state.diagnostics.filter((d) => d.nodeId === nodeId);
}
