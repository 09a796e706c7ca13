"""HTTP API and static UI host.

Endpoints (JSON unless noted):
  GET  /api/status        project summary
  GET  /api/tree          per-file node forests with badges and counts
  GET  /api/node/{id}     one node with comment and code text
  GET  /api/diagnostics   current findings
  POST /api/ack           {"nodeId": ...} acknowledge a stale node
  POST /api/check         {"nodeId": ..., "backend": optional spec}
  GET  /api/events        server-sent events; one diagnostics batch per event
  GET  /ui/...            static frontend bundle

A watch loop runs in the background; every diagnostics change is pushed
to subscribers, so interfaces never poll.
"""

from __future__ import annotations

import json
import logging
import mimetypes
import queue
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Any, Optional

from . import __version__
from .checker import VerdictCache, check_node, comment_block_text
from .config import BackendConfig, CodatConfig, backend_from_spec
from .engine import ProjectScan, scan_project
from .errors import CodatError, EmptyRegion, UnknownNode
from .model import CommentNode, Diagnostic, Verdict
from .tracker import (
    SnapshotMissing,
    Watcher,
    acknowledge,
    diff,
    load_snapshot,
    take_snapshot,
    write_snapshot,
)

log = logging.getLogger("codat.server")

FALLBACK_PAGE = """<!doctype html>
<html><head><title>codat</title></head>
<body>
<h1>codat API</h1>
<p>No UI bundle was found. The JSON API is live; see /api/status,
/api/tree, /api/diagnostics, and /api/events.</p>
</body></html>
"""


class ServerState:
    """Shared mutable state behind the handlers, guarded by one lock."""

    def __init__(
        self,
        root: Path,
        config: CodatConfig,
        backend: Optional[BackendConfig] = None,
        ui_dir: Optional[Path] = None,
    ):
        self.root = Path(root).resolve()
        self.config = config
        self.backend = backend or config.check.backend
        self.ui_dir = ui_dir
        self.lock = threading.RLock()
        try:
            self.baseline = load_snapshot(self.root)
        except SnapshotMissing:
            log.info("no snapshot yet; taking one now")
            self.baseline = take_snapshot(self.root, config)
        self.scan: ProjectScan = scan_project(self.root, config)
        self.drift: list[Diagnostic] = []
        self.check_diags: dict[str, Diagnostic] = {}
        self.verdicts: dict[str, Verdict] = {}
        self.cache = VerdictCache()
        self.subscribers: list["queue.Queue[dict]"] = []
        self.watcher = Watcher(
            self.root, config, sink=self._on_batch, baseline=self.baseline
        )
        self._watch_thread = threading.Thread(
            target=self.watcher.run, daemon=True, name="codat-watch"
        )

    def start(self) -> None:
        self._watch_thread.start()

    def shutdown(self) -> None:
        self.watcher.baseline = self.baseline
        self.watcher.stop()
        self._watch_thread.join(timeout=5)

    # -- diagnostics assembly -------------------------------------------

    def _on_batch(self, batch: list[Diagnostic]) -> None:
        with self.lock:
            self.drift = batch
            if self.watcher.scan is not None:
                self.scan = self.watcher.scan
            payload = self.diagnostics_payload()
        self.broadcast({"type": "diagnostics", **payload})

    def all_diagnostics(self) -> list[Diagnostic]:
        merged = list(self.scan.diagnostics()) + list(self.drift)
        merged.extend(self.check_diags.values())
        return sorted(merged, key=lambda d: d.sort_key())

    def diagnostics_payload(self) -> dict[str, Any]:
        diags = self.all_diagnostics()
        counts: dict[str, int] = {}
        for d in diags:
            counts[d.kind] = counts.get(d.kind, 0) + 1
        return {
            "diagnostics": [d.to_dict() for d in diags],
            "counts": counts,
        }

    def broadcast(self, event: dict) -> None:
        with self.lock:
            targets = list(self.subscribers)
        for q in targets:
            q.put(event)

    # -- node views ------------------------------------------------------

    def badge_for(self, node_id: str) -> str:
        if node_id in self.check_diags:
            return "inconsistent"
        if any(d.node_id == node_id and d.kind == "StaleComment" for d in self.drift):
            return "stale"
        return "clean"

    def node_json(self, path: str, node: CommentNode) -> dict[str, Any]:
        fs = self.scan.files[path]
        region = fs.regions.get(node.id)
        children = [
            self.node_json(path, fs.build.nodes[cid])
            for cid in node.children
            if cid in fs.build.nodes
        ]
        badge = self.badge_for(node.id)
        issues = sum(1 for c in children if c["badge"] != "clean")
        issues += sum(c["descendantIssues"] for c in children)
        keywords: list[str] = []
        for record in fs.build.anchor_records.get(node.id, ()):
            for clause in record.clauses:
                if clause.keyword not in keywords:
                    keywords.append(clause.keyword)
        data = node.to_dict()
        data.update(
            {
                "children": children,
                "file": path,
                "scope": fs.build.scope_by_node.get(node.id, ""),
                "clauses": keywords,
                "linked": region is not None,
                "region": region.to_dict() if region else None,
                "badge": badge,
                "descendantIssues": issues,
                "verdict": self.verdicts[node.id].to_dict()
                if node.id in self.verdicts
                else None,
            }
        )
        return data

    def tree_payload(self) -> dict[str, Any]:
        files = []
        for path, fs in sorted(self.scan.files.items()):
            roots = [self.node_json(path, n) for n in fs.build.roots]
            counts = {"nodes": len(fs.build.nodes), "linked": len(fs.links)}
            for badge in ("stale", "inconsistent"):
                counts[badge] = sum(
                    1
                    for nid in fs.build.nodes
                    if self.badge_for(nid) == badge
                )
            files.append({"file": path, "counts": counts, "roots": roots})
        return {"files": files}

    def node_payload(self, node_id: str) -> dict[str, Any]:
        nodes = self.scan.nodes()
        if node_id not in nodes:
            raise UnknownNode(f"no node with id {node_id}")
        path, node = nodes[node_id]
        fs = self.scan.files[path]
        data = self.node_json(path, node)
        region = fs.regions.get(node_id)
        data["commentText"] = comment_block_text(fs, node)
        data["codeText"] = (
            fs.data[region.start : region.end].decode("utf-8", "replace")
            if region
            else None
        )
        data["fileText"] = fs.data.decode("utf-8", "replace")
        return data

    def status_payload(self) -> dict[str, Any]:
        return {
            "root": str(self.root),
            "version": __version__,
            "backendId": self.backend.backend_id,
            "files": len(self.scan.files),
            "nodes": sum(len(fs.build.nodes) for fs in self.scan.files.values()),
            "links": sum(len(fs.links) for fs in self.scan.files.values()),
        }

    # -- actions ----------------------------------------------------------

    def do_ack(self, node_id: str) -> dict[str, Any]:
        with self.lock:
            snapshot = acknowledge(node_id, self.baseline, self.scan)
            write_snapshot(snapshot, self.root)
            self.baseline = snapshot
            self.watcher.baseline = snapshot
            self.drift = diff(snapshot, self.scan)
            payload = self.diagnostics_payload()
        self.watcher.poke()
        self.broadcast({"type": "diagnostics", **payload})
        return {"ok": True, **payload}

    def do_check(self, node_id: str, backend_spec: Optional[str]) -> dict[str, Any]:
        backend = (
            backend_from_spec(backend_spec, self.config) if backend_spec else self.backend
        )
        with self.lock:
            scan = self.scan
        verdict, diag = check_node(node_id, scan, backend, self.cache)
        with self.lock:
            self.verdicts[node_id] = verdict
            if diag is not None:
                self.check_diags[node_id] = diag
            else:
                self.check_diags.pop(node_id, None)
            payload = self.diagnostics_payload()
        self.broadcast({"type": "diagnostics", **payload})
        return {"verdict": verdict.to_dict(), "nodeId": node_id, **payload}


def make_handler(state: ServerState):
    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"

        def log_message(self, fmt: str, *args) -> None:
            log.debug("%s %s", self.address_string(), fmt % args)

        # -- plumbing ----------------------------------------------------

        def send_json(self, code: int, obj: dict) -> None:
            body = json.dumps(obj).encode("utf-8")
            self.send_response(code)
            self.send_header("Content-Type", "application/json; charset=utf-8")
            self.send_header("Content-Length", str(len(body)))
            self.send_header("Access-Control-Allow-Origin", "*")
            self.end_headers()
            self.wfile.write(body)

        def read_json(self) -> dict:
            length = int(self.headers.get("Content-Length") or 0)
            raw = self.rfile.read(length) if length else b"{}"
            try:
                parsed = json.loads(raw.decode("utf-8"))
            except ValueError as exc:
                raise ValueError(f"request body is not JSON: {exc}") from exc
            if not isinstance(parsed, dict):
                raise ValueError("request body must be a JSON object")
            return parsed

        # -- routes ------------------------------------------------------

        def do_GET(self) -> None:  # noqa: N802 (stdlib naming)
            path = self.path.split("?", 1)[0]
            try:
                if path == "/api/status":
                    with state.lock:
                        self.send_json(200, state.status_payload())
                elif path == "/api/tree":
                    with state.lock:
                        self.send_json(200, state.tree_payload())
                elif path == "/api/diagnostics":
                    with state.lock:
                        self.send_json(200, state.diagnostics_payload())
                elif path.startswith("/api/node/"):
                    node_id = path[len("/api/node/") :]
                    with state.lock:
                        self.send_json(200, state.node_payload(node_id))
                elif path == "/api/events":
                    self.serve_events()
                elif path == "/" or path == "/ui":
                    self.send_response(302)
                    self.send_header("Location", "/ui/")
                    self.send_header("Content-Length", "0")
                    self.end_headers()
                elif path.startswith("/ui/"):
                    self.serve_static(path[len("/ui/") :] or "index.html")
                else:
                    self.send_json(404, {"error": f"no route {path}"})
            except UnknownNode as exc:
                self.send_json(404, {"error": str(exc)})
            except BrokenPipeError:
                pass
            except Exception as exc:
                log.exception("GET %s failed", path)
                self.send_json(500, {"error": str(exc)})

        def do_POST(self) -> None:  # noqa: N802
            path = self.path.split("?", 1)[0]
            try:
                body = self.read_json()
                if path == "/api/ack":
                    node_id = body.get("nodeId") or ""
                    self.send_json(200, state.do_ack(node_id))
                elif path == "/api/check":
                    node_id = body.get("nodeId") or ""
                    self.send_json(
                        200, state.do_check(node_id, body.get("backend"))
                    )
                else:
                    self.send_json(404, {"error": f"no route {path}"})
            except UnknownNode as exc:
                self.send_json(404, {"error": str(exc)})
            except (ValueError, EmptyRegion) as exc:
                self.send_json(400, {"error": str(exc)})
            except CodatError as exc:
                self.send_json(409, {"error": str(exc)})
            except BrokenPipeError:
                pass
            except Exception as exc:
                log.exception("POST %s failed", path)
                self.send_json(500, {"error": str(exc)})

        # -- server-sent events -------------------------------------------

        def serve_events(self) -> None:
            q: "queue.Queue[dict]" = queue.Queue()
            with state.lock:
                state.subscribers.append(q)
                first = {"type": "diagnostics", **state.diagnostics_payload()}
            try:
                self.send_response(200)
                self.send_header("Content-Type", "text/event-stream")
                self.send_header("Cache-Control", "no-cache")
                self.send_header("Connection", "close")
                self.end_headers()
                self.write_event(first)
                while True:
                    try:
                        event = q.get(timeout=15)
                    except queue.Empty:
                        self.wfile.write(b": keepalive\n\n")
                        self.wfile.flush()
                        continue
                    self.write_event(event)
            except (BrokenPipeError, ConnectionResetError, OSError):
                pass
            finally:
                with state.lock:
                    if q in state.subscribers:
                        state.subscribers.remove(q)

        def write_event(self, event: dict) -> None:
            data = json.dumps(event)
            self.wfile.write(f"data: {data}\n\n".encode("utf-8"))
            self.wfile.flush()

        # -- static files ---------------------------------------------------

        def serve_static(self, rel: str) -> None:
            ui_dir = state.ui_dir
            if ui_dir is None or not Path(ui_dir).is_dir():
                body = FALLBACK_PAGE.encode("utf-8")
                self.send_response(200)
                self.send_header("Content-Type", "text/html; charset=utf-8")
                self.send_header("Content-Length", str(len(body)))
                self.end_headers()
                self.wfile.write(body)
                return
            base = Path(ui_dir).resolve()
            target = (base / rel).resolve()
            if not str(target).startswith(str(base)) or not target.is_file():
                self.send_json(404, {"error": f"no asset {rel}"})
                return
            ctype = mimetypes.guess_type(str(target))[0] or "application/octet-stream"
            body = target.read_bytes()
            self.send_response(200)
            self.send_header("Content-Type", ctype)
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

    return Handler


class CodatServer:
    """Owns the HTTP server plus the background watch thread."""

    def __init__(
        self,
        root: Path | str,
        config: Optional[CodatConfig] = None,
        host: str = "127.0.0.1",
        port: int = 0,
        backend: Optional[BackendConfig] = None,
        ui_dir: Optional[Path] = None,
    ):
        config = config or CodatConfig()
        self.state = ServerState(Path(root), config, backend=backend, ui_dir=ui_dir)
        self.httpd = ThreadingHTTPServer((host, port), make_handler(self.state))
        self.httpd.daemon_threads = True

    @property
    def address(self) -> tuple[str, int]:
        host, port = self.httpd.server_address[:2]
        return str(host), int(port)

    def serve_forever(self) -> None:
        self.state.start()
        try:
            self.httpd.serve_forever(poll_interval=0.2)
        finally:
            self.shutdown()

    def start_background(self) -> threading.Thread:
        self.state.start()
        thread = threading.Thread(
            target=self.httpd.serve_forever, kwargs={"poll_interval": 0.2}, daemon=True
        )
        thread.start()
        return thread

    def shutdown(self) -> None:
        self.state.shutdown()
        self.httpd.shutdown()
        self.httpd.server_close()
