/** Typed client for the codat HTTP API, including the event stream. */

import type {
  AckResponse,
  CheckResponse,
  DiagnosticsPayload,
  NodeDetailJson,
  StatusPayload,
  TreePayload,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

/** Structural subset of EventSource, so tests can substitute streams. */
export interface EventStreamLike {
  onmessage: ((ev: { data: string }) => void) | null;
  onopen: ((ev?: unknown) => void) | null;
  onerror: ((ev?: unknown) => void) | null;
  close(): void;
}

export type EventStreamFactory = (url: string) => EventStreamLike;

export interface EventHandlers {
  onBatch(payload: DiagnosticsPayload): void;
  onUp(): void;
  onDown(): void;
}

export interface ApiPort {
  status(): Promise<StatusPayload>;
  tree(): Promise<TreePayload>;
  node(nodeId: string): Promise<NodeDetailJson>;
  diagnostics(): Promise<DiagnosticsPayload>;
  ack(nodeId: string): Promise<AckResponse>;
  check(nodeId: string, backend?: string): Promise<CheckResponse>;
  events(handlers: EventHandlers): () => void;
}

async function errorMessage(res: Response): Promise<string> {
  try {
    const body = (await res.json()) as { error?: string };
    if (body && typeof body.error === "string") return body.error;
  } catch {
    // non-JSON error body; fall through to the status line
  }
  return `request failed with status ${res.status}`;
}

export class ApiClient implements ApiPort {
  constructor(
    readonly base: string = "",
    private readonly openStream?: EventStreamFactory,
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const res = await fetch(this.base + path, init);
    if (!res.ok) {
      throw new ApiError(res.status, await errorMessage(res));
    }
    return (await res.json()) as T;
  }

  private post<T>(path: string, body: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  status(): Promise<StatusPayload> {
    return this.request("/api/status");
  }

  tree(): Promise<TreePayload> {
    return this.request("/api/tree");
  }

  node(nodeId: string): Promise<NodeDetailJson> {
    return this.request(`/api/node/${encodeURIComponent(nodeId)}`);
  }

  diagnostics(): Promise<DiagnosticsPayload> {
    return this.request("/api/diagnostics");
  }

  ack(nodeId: string): Promise<AckResponse> {
    return this.post("/api/ack", { nodeId });
  }

  check(nodeId: string, backend?: string): Promise<CheckResponse> {
    return this.post("/api/check", backend ? { nodeId, backend } : { nodeId });
  }

  /** Open the diagnostics stream; returns a closer. */
  events(handlers: EventHandlers): () => void {
    const factory =
      this.openStream ??
      ((url: string) => new EventSource(url) as unknown as EventStreamLike);
    const stream = factory(this.base + "/api/events");
    stream.onopen = () => handlers.onUp();
    stream.onerror = () => handlers.onDown();
    stream.onmessage = (ev) => {
      let parsed: { type?: string } & DiagnosticsPayload;
      try {
        parsed = JSON.parse(ev.data);
      } catch {
        return;
      }
      if (parsed.type === "diagnostics") {
        handlers.onBatch({
          diagnostics: parsed.diagnostics,
          counts: parsed.counts,
        });
      }
    };
    return () => stream.close();
  }
}
