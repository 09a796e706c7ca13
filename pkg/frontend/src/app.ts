/** Application wiring: fetch, event stream, actions, and rendering.
 *
 * The browser never edits source files; edits happen in the user's
 * editor and arrive here as diagnostics batches over the event stream.
 */

import { ApiClient, ApiError, type ApiPort } from "./api.js";
import { renderDetail } from "./detail.js";
import {
  type AppState,
  applyDiagnostics,
  applySelection,
  applyStatus,
  applyTree,
  applyVerdict,
  initialState,
  setConnected,
} from "./state.js";
import { showToast } from "./toast.js";
import { renderTree } from "./tree.js";

export interface AppOptions {
  toastMs?: number;
}

export interface AppHandle {
  state: AppState;
  refresh(): Promise<void>;
  select(nodeId: string): Promise<void>;
  act(nodeId: string, action: "ack" | "runCheck"): Promise<void>;
  reconnect(): void;
  render(): void;
  dispose(): void;
}

interface Panes {
  topbar: HTMLElement;
  banner: HTMLElement;
  tree: HTMLElement;
  detail: HTMLElement;
  toasts: HTMLElement;
}

function findPanes(doc: Document): Panes {
  const get = (id: string): HTMLElement => {
    const el = doc.getElementById(id);
    if (!el) throw new Error(`missing #${id} container`);
    return el;
  };
  return {
    topbar: get("topbar"),
    banner: get("banner"),
    tree: get("tree"),
    detail: get("detail"),
    toasts: get("toasts"),
  };
}

export async function initApp(
  doc: Document,
  api: ApiPort,
  options: AppOptions = {},
): Promise<AppHandle> {
  const panes = findPanes(doc);
  const state = initialState();
  const toastMs = options.toastMs ?? 4000;
  let closeStream: (() => void) | null = null;
  let selectSeq = 0;

  const toastError = (err: unknown) => {
    const message = err instanceof Error ? err.message : String(err);
    showToast(panes.toasts, message, "error", toastMs);
  };

  const render = () => {
    renderTopbar();
    renderBanner();
    panes.tree.replaceChildren(
      renderTree(doc, state, { onSelect: (id) => void select(id) }),
    );
    panes.detail.replaceChildren(
      renderDetail(doc, state, {
        onAct: (id, action) => void act(id, action),
        onMarker: (id) => focusTreeNode(id),
      }),
    );
  };

  const renderTopbar = () => {
    panes.topbar.replaceChildren();
    const brand = doc.createElement("span");
    brand.className = "brand";
    brand.textContent = "codat";
    panes.topbar.appendChild(brand);
    if (state.status) {
      const meta = doc.createElement("span");
      meta.className = "meta";
      const s = state.status;
      meta.textContent =
        `${s.root} · ${s.files} files · ${s.nodes} nodes · ` +
        `${s.links} linked · backend ${s.backendId}`;
      panes.topbar.appendChild(meta);
    }
  };

  const renderBanner = () => {
    panes.banner.hidden = state.connected;
    panes.banner.replaceChildren();
    if (state.connected) return;
    const text = doc.createElement("span");
    text.textContent = "Connection lost; live updates are paused.";
    panes.banner.appendChild(text);
    const retry = doc.createElement("button");
    retry.type = "button";
    retry.textContent = "Retry";
    retry.addEventListener("click", () => reconnect());
    panes.banner.appendChild(retry);
  };

  const focusTreeNode = (nodeId: string) => {
    const row = panes.tree.querySelector<HTMLElement>(
      `[data-node-id="${nodeId}"]`,
    );
    row?.scrollIntoView?.({ block: "center" });
    row?.focus?.();
  };

  const scrollToRegion = () => {
    const target =
      panes.detail.querySelector<HTMLElement>(".line.hl-code") ??
      panes.detail.querySelector<HTMLElement>(".line.hl-comment");
    target?.scrollIntoView?.({ block: "center" });
  };

  const refresh = async (): Promise<void> => {
    try {
      const [status, tree, diagnostics] = await Promise.all([
        api.status(),
        api.tree(),
        api.diagnostics(),
      ]);
      applyStatus(state, status);
      applyTree(state, tree);
      applyDiagnostics(state, diagnostics);
      setConnected(state, true);
    } catch (err) {
      setConnected(state, false);
    }
    render();
  };

  const refreshSelected = async (): Promise<void> => {
    if (!state.selectedId) return;
    try {
      applySelection(state, await api.node(state.selectedId));
    } catch {
      applySelection(state, null);
    }
  };

  const select = async (nodeId: string): Promise<void> => {
    const seq = ++selectSeq;
    try {
      const detail = await api.node(nodeId);
      if (seq !== selectSeq) return;
      applySelection(state, detail);
      render();
      scrollToRegion();
    } catch (err) {
      toastError(err);
    }
  };

  const act = async (
    nodeId: string,
    action: "ack" | "runCheck",
  ): Promise<void> => {
    try {
      if (action === "ack") {
        applyDiagnostics(state, await api.ack(nodeId));
      } else {
        const res = await api.check(nodeId);
        applyVerdict(state, res.nodeId, res.verdict);
        applyDiagnostics(state, res);
      }
      await refreshSelected();
      render();
    } catch (err) {
      toastError(err);
      render();
    }
  };

  const openStream = () => {
    closeStream?.();
    closeStream = api.events({
      onBatch: (payload) => {
        applyDiagnostics(state, payload);
        setConnected(state, true);
        render();
        // The tree and the open node may have gained or lost entries.
        void Promise.all([
          api.tree().then((tree) => applyTree(state, tree)),
          refreshSelected(),
        ])
          .then(() => render())
          .catch(() => undefined);
      },
      onUp: () => {
        if (!state.connected) void refresh();
      },
      onDown: () => {
        setConnected(state, false);
        render();
      },
    });
  };

  const reconnect = () => {
    void refresh();
    openStream();
  };

  await refresh();
  openStream();

  return {
    state,
    refresh,
    select,
    act,
    reconnect,
    render,
    dispose: () => closeStream?.(),
  };
}

declare global {
  interface Window {
    codatApp?: AppHandle;
  }
}

if (typeof document !== "undefined" && document.getElementById("tree")) {
  void initApp(document, new ApiClient("")).then((app) => {
    window.codatApp = app;
  });
}
