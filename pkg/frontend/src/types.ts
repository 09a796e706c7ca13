/** JSON shapes served by the codat HTTP API. */

export type Badge = "clean" | "stale" | "inconsistent" | "orphaned";

export type Outcome = "consistent" | "inconsistent" | "unknown";

export interface RangeJson {
  start: number;
  end: number;
  startLine: number;
  endLine: number;
}

export interface LabelJson {
  prefix: string;
  path: number[];
  raw: string;
}

export interface AnchorJson {
  file: string;
  range: RangeJson;
  textHash: string;
  contextHash: string;
  status: string;
}

export interface VerdictJson {
  outcome: Outcome;
  explanation: string;
  backendId: string;
}

export interface DiagnosticJson {
  kind: string;
  file: string;
  message: string;
  severity: "error" | "warning";
  nodeId: string | null;
  commentRange: RangeJson | null;
  codeRange: RangeJson | null;
}

export interface TreeNodeJson {
  id: string;
  label: LabelJson;
  anchors: AnchorJson[];
  parentId: string | null;
  children: TreeNodeJson[];
  file: string;
  scope: string;
  clauses: string[];
  linked: boolean;
  region: RangeJson | null;
  badge: Badge;
  descendantIssues: number;
  verdict: VerdictJson | null;
}

export interface FileEntryJson {
  file: string;
  counts: Record<string, number>;
  roots: TreeNodeJson[];
}

export interface TreePayload {
  files: FileEntryJson[];
}

export interface NodeDetailJson extends TreeNodeJson {
  commentText: string;
  codeText: string | null;
  fileText: string;
}

export interface DiagnosticsPayload {
  diagnostics: DiagnosticJson[];
  counts: Record<string, number>;
}

export interface StatusPayload {
  root: string;
  version: string;
  backendId: string;
  files: number;
  nodes: number;
  links: number;
}

export interface AckResponse extends DiagnosticsPayload {
  ok: boolean;
}

export interface CheckResponse extends DiagnosticsPayload {
  verdict: VerdictJson;
  nodeId: string;
}
