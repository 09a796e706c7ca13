/** Node detail pane: metadata, actions, and the highlighted file view. */

import type { AppState } from "./state.js";
import { badgeOf, diagnosticsFor } from "./state.js";
import { badgeElement } from "./tree.js";
import type { NodeDetailJson } from "./types.js";

export interface DetailHandlers {
  onAct(nodeId: string, action: "ack" | "runCheck"): void;
  onMarker(nodeId: string): void;
}

function lineSet(detail: NodeDetailJson): {
  comment: Set<number>;
  code: Set<number>;
} {
  const comment = new Set<number>();
  for (const anchor of detail.anchors) {
    for (let n = anchor.range.startLine; n <= anchor.range.endLine; n++) {
      comment.add(n);
    }
  }
  const code = new Set<number>();
  if (detail.region) {
    for (let n = detail.region.startLine; n <= detail.region.endLine; n++) {
      code.add(n);
    }
  }
  return { comment, code };
}

function renderFileView(
  doc: Document,
  detail: NodeDetailJson,
  handlers: DetailHandlers,
): HTMLElement {
  const pane = doc.createElement("div");
  pane.className = "code-pane";
  const { comment, code } = lineSet(detail);
  const lines = detail.fileText.split("\n");
  lines.forEach((text, i) => {
    const n = i + 1;
    const line = doc.createElement("div");
    line.className = "line";
    line.dataset.line = String(n);
    if (comment.has(n)) line.classList.add("hl-comment");
    else if (code.has(n)) line.classList.add("hl-code");

    const gutter = doc.createElement("span");
    gutter.className = "gutter";
    gutter.textContent = String(n);
    line.appendChild(gutter);

    const margin = doc.createElement("span");
    margin.className = "margin";
    if (comment.has(n)) {
      const marker = doc.createElement("span");
      marker.className = "marker";
      marker.textContent = "◆";
      marker.title = `back to ${detail.label.raw}`;
      marker.addEventListener("click", () => handlers.onMarker(detail.id));
      margin.appendChild(marker);
    }
    line.appendChild(margin);

    const codeEl = doc.createElement("code");
    codeEl.textContent = text;
    line.appendChild(codeEl);
    pane.appendChild(line);
  });
  return pane;
}

export function renderDetail(
  doc: Document,
  state: AppState,
  handlers: DetailHandlers,
): HTMLElement {
  const pane = doc.createElement("div");
  const detail = state.selected;
  if (!detail) {
    const hint = doc.createElement("div");
    hint.className = "placeholder";
    hint.textContent = "Select a node to inspect its comment and linked code.";
    pane.appendChild(hint);
    return pane;
  }

  const badge = badgeOf(state, detail.id);

  const head = doc.createElement("div");
  head.className = "detail-head";
  const label = doc.createElement("span");
  label.className = "label";
  label.textContent = `${detail.label.raw}`;
  head.appendChild(label);
  const scope = doc.createElement("span");
  scope.className = "scope";
  scope.textContent = `${detail.file} · ${detail.scope}`;
  head.appendChild(scope);
  head.appendChild(badgeElement(doc, badge));
  pane.appendChild(head);

  const actions = doc.createElement("div");
  actions.className = "detail-actions";
  const ack = doc.createElement("button");
  ack.type = "button";
  ack.className = "act-ack";
  ack.textContent = "Acknowledge";
  ack.disabled = badge !== "stale";
  if (ack.disabled) ack.title = "only stale nodes can be acknowledged";
  ack.addEventListener("click", () => handlers.onAct(detail.id, "ack"));
  actions.appendChild(ack);
  const check = doc.createElement("button");
  check.type = "button";
  check.className = "act-check";
  check.textContent = "Run check";
  check.disabled = !detail.linked;
  if (check.disabled) check.title = "no linked code region to check";
  check.addEventListener("click", () => handlers.onAct(detail.id, "runCheck"));
  actions.appendChild(check);
  pane.appendChild(actions);

  if (badge === "stale") {
    const warn = doc.createElement("div");
    warn.className = "warning";
    const found = diagnosticsFor(state, detail.id).find(
      (d) => d.kind === "StaleComment",
    );
    warn.textContent =
      found?.message ??
      "The linked code's fingerprint changed since the last snapshot.";
    pane.appendChild(warn);
  }

  if (!detail.linked) {
    const notice = doc.createElement("div");
    notice.className = "notice notice-sketch";
    notice.textContent =
      "Sketch-only node: no code region is linked here; the implementation lives at a twin anchor or is still pending.";
    pane.appendChild(notice);
  }

  const verdict = state.verdicts.get(detail.id);
  if (verdict) {
    const box = doc.createElement("div");
    box.className = "verdict";
    if (verdict.outcome === "inconsistent") box.classList.add("verdict-bad");
    box.textContent = `${verdict.outcome} (${verdict.backendId})\n${verdict.explanation}`;
    pane.appendChild(box);
  }

  pane.appendChild(renderFileView(doc, detail, handlers));
  return pane;
}
