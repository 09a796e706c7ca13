/** Builders for API payloads and the page shell used across tests. */

import type {
  AnchorJson,
  DiagnosticJson,
  DiagnosticsPayload,
  NodeDetailJson,
  RangeJson,
  StatusPayload,
  TreeNodeJson,
} from "../src/types.js";

let nextId = 0;

export function range(startLine: number, endLine: number): RangeJson {
  return { start: startLine * 100, end: endLine * 100 + 50, startLine, endLine };
}

export function anchor(startLine: number, endLine = startLine): AnchorJson {
  return {
    file: "Query.java",
    range: range(startLine, endLine),
    textHash: "t".repeat(16),
    contextHash: "c".repeat(16),
    status: "valid",
  };
}

export function node(
  raw: string,
  overrides: Partial<TreeNodeJson> = {},
): TreeNodeJson {
  const match = /^([A-Za-z]+)([\d.]+)$/.exec(raw);
  if (!match) throw new Error(`bad label ${raw}`);
  return {
    id: overrides.id ?? `node-${nextId++}-${raw}`,
    label: {
      prefix: match[1],
      path: match[2].split(".").map(Number),
      raw,
    },
    anchors: [anchor(3)],
    parentId: null,
    children: [],
    file: "Query.java",
    scope: "void m()",
    clauses: [],
    linked: true,
    region: range(10, 12),
    badge: "clean",
    descendantIssues: 0,
    verdict: null,
    ...overrides,
  };
}

export function detail(
  raw: string,
  overrides: Partial<NodeDetailJson> = {},
): NodeDetailJson {
  const lines = Array.from({ length: 20 }, (_, i) => `line ${i + 1}`);
  return {
    ...node(raw),
    commentText: `// ${raw}: does things`,
    codeText: "int x = 1;",
    fileText: lines.join("\n"),
    ...overrides,
  };
}

export function diag(
  kind: string,
  nodeId: string | null,
  overrides: Partial<DiagnosticJson> = {},
): DiagnosticJson {
  const ranged = kind === "StaleComment" || kind === "Inconsistent";
  return {
    kind,
    file: "Query.java",
    message: `${kind} reported`,
    severity: kind === "OrphanedComment" ? "warning" : "error",
    nodeId,
    commentRange: ranged ? range(3, 3) : null,
    codeRange: ranged ? range(10, 12) : null,
    ...overrides,
  };
}

export function batch(...diagnostics: DiagnosticJson[]): DiagnosticsPayload {
  const counts: Record<string, number> = {};
  for (const d of diagnostics) counts[d.kind] = (counts[d.kind] ?? 0) + 1;
  return { diagnostics, counts };
}

export function status(overrides: Partial<StatusPayload> = {}): StatusPayload {
  return {
    root: "/tmp/proj",
    version: "0.1.0",
    backendId: "constant:unknown",
    files: 1,
    nodes: 3,
    links: 2,
    ...overrides,
  };
}

/** The same container ids index.html provides. */
export function mountShell(doc: Document): void {
  doc.body.innerHTML = [
    '<header id="topbar"></header>',
    '<div id="banner" hidden></div>',
    '<main><nav id="tree"></nav><section id="detail"></section></main>',
    '<div id="toasts"></div>',
  ].join("\n");
}

export async function waitFor(
  predicate: () => boolean,
  timeoutMs = 10000,
  stepMs = 25,
): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    if (predicate()) return;
    await new Promise((resolve) => setTimeout(resolve, stepMs));
  }
  if (!predicate()) throw new Error("condition not met in time");
}
