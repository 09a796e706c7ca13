/** Comment-tree pane: per-file groups of labeled nodes with badges. */

import type { AppState, Rollup } from "./state.js";
import { badgeOf, rollupCounts, totalNodes } from "./state.js";
import type { Badge, TreeNodeJson } from "./types.js";

export interface TreeHandlers {
  onSelect(nodeId: string): void;
}

export function badgeElement(doc: Document, badge: Badge): HTMLElement {
  const el = doc.createElement("span");
  el.className = `badge badge-${badge}`;
  el.textContent = badge;
  return el;
}

function rollupText(rollup: Rollup): string {
  const parts: string[] = [];
  for (const key of ["inconsistent", "stale", "orphaned"] as const) {
    if (rollup[key] > 0) parts.push(`${rollup[key]} ${key}`);
  }
  return parts.join(", ");
}

function renderNode(
  doc: Document,
  node: TreeNodeJson,
  state: AppState,
  handlers: TreeHandlers,
): HTMLElement {
  const li = doc.createElement("li");

  const row = doc.createElement("button");
  row.type = "button";
  row.className = "node-row";
  row.dataset.nodeId = node.id;
  if (state.selectedId === node.id) row.classList.add("selected");
  row.addEventListener("click", () => handlers.onSelect(node.id));

  const label = doc.createElement("span");
  label.className = "label";
  label.textContent = node.label.raw;
  row.appendChild(label);

  if (node.clauses.length > 0) {
    const clause = doc.createElement("span");
    clause.className = "clause";
    clause.textContent = node.clauses[0];
    row.appendChild(clause);
  }

  row.appendChild(badgeElement(doc, badgeOf(state, node.id)));

  const rollup = rollupCounts(node, state);
  const text = rollupText(rollup);
  if (text) {
    const span = doc.createElement("span");
    span.className = "rollup";
    span.textContent = text;
    row.appendChild(span);
  }

  li.appendChild(row);

  const verdict = state.verdicts.get(node.id);
  if (verdict && verdict.outcome === "inconsistent") {
    const why = doc.createElement("div");
    why.className = "explanation";
    why.textContent = verdict.explanation;
    li.appendChild(why);
  }

  if (node.children.length > 0) {
    const ul = doc.createElement("ul");
    for (const child of node.children) {
      ul.appendChild(renderNode(doc, child, state, handlers));
    }
    li.appendChild(ul);
  }
  return li;
}

export function renderTree(
  doc: Document,
  state: AppState,
  handlers: TreeHandlers,
): HTMLElement {
  const pane = doc.createElement("div");
  if (totalNodes(state) === 0) {
    const empty = doc.createElement("div");
    empty.className = "empty";
    empty.textContent =
      "No labeled comments found. Add CS/AS/SP labels to source comments and rescan.";
    pane.appendChild(empty);
    return pane;
  }

  for (const entry of state.files) {
    if (entry.roots.length === 0) continue;
    const group = doc.createElement("section");
    group.className = "file-group";
    group.dataset.file = entry.file;

    const head = doc.createElement("div");
    head.className = "file-head";
    const name = doc.createElement("span");
    name.textContent = entry.file;
    head.appendChild(name);
    const counts = doc.createElement("span");
    counts.className = "file-counts";
    counts.textContent = `${entry.counts.nodes ?? 0} nodes, ${entry.counts.linked ?? 0} linked`;
    head.appendChild(counts);
    group.appendChild(head);

    const ul = doc.createElement("ul");
    for (const root of entry.roots) {
      ul.appendChild(renderNode(doc, root, state, handlers));
    }
    group.appendChild(ul);
    pane.appendChild(group);
  }
  return pane;
}
