from __future__ import annotations

import json
import threading
import time
import urllib.error
import urllib.request
from pathlib import Path

import pytest

from codat.config import CodatConfig, backend_from_spec
from codat.corpus import FIXTURES_DIR, apply_bug_patch
from codat.server import CodatServer
from codat.tracker import take_snapshot

ADDDOC_CS1 = "0ba1b4ffa1eac999"


@pytest.fixture()
def server(corpus_dir: Path):
    config = CodatConfig()
    take_snapshot(corpus_dir, config)
    backend = backend_from_spec(f"replay:{FIXTURES_DIR}", config)
    srv = CodatServer(corpus_dir, config, port=0, backend=backend)
    srv.start_background()
    host, port = srv.address
    yield srv, f"http://{host}:{port}", corpus_dir
    srv.shutdown()


def get(base: str, path: str):
    with urllib.request.urlopen(base + path, timeout=10) as resp:
        return resp.status, json.loads(resp.read())


def post(base: str, path: str, payload: dict):
    req = urllib.request.Request(
        base + path,
        data=json.dumps(payload).encode("utf-8"),
        headers={"Content-Type": "application/json"},
        method="POST",
    )
    with urllib.request.urlopen(req, timeout=30) as resp:
        return resp.status, json.loads(resp.read())


def post_status(base: str, path: str, payload: dict) -> int:
    try:
        status, _ = post(base, path, payload)
        return status
    except urllib.error.HTTPError as exc:
        return exc.code


class EventTap:
    """Collects SSE diagnostics events from /api/events."""

    def __init__(self, base: str):
        self.events: list[dict] = []
        self._have = threading.Condition()
        self._thread = threading.Thread(target=self._run, args=(base,), daemon=True)
        self._thread.start()

    def _run(self, base: str) -> None:
        req = urllib.request.Request(base + "/api/events")
        with urllib.request.urlopen(req, timeout=60) as resp:
            data_lines: list[str] = []
            while True:
                raw = resp.readline()
                if not raw:
                    return
                line = raw.decode("utf-8").rstrip("\n")
                if line.startswith("data: "):
                    data_lines.append(line[len("data: ") :])
                elif not line and data_lines:
                    event = json.loads("\n".join(data_lines))
                    data_lines = []
                    with self._have:
                        self.events.append(event)
                        self._have.notify_all()

    def wait_for(self, count: int, timeout: float = 15.0) -> list[dict]:
        deadline = time.time() + timeout
        with self._have:
            while len(self.events) < count:
                remaining = deadline - time.time()
                if remaining <= 0:
                    raise AssertionError(
                        f"only {len(self.events)} events arrived, wanted {count}"
                    )
                self._have.wait(remaining)
            return list(self.events)


def test_status_reports_project_shape(server):
    _, base, _ = server
    status, body = get(base, "/api/status")
    assert status == 200
    assert body["files"] == 6
    assert body["nodes"] == 23
    assert body["links"] == 11
    assert body["backendId"] == "replay"


def test_tree_nests_nodes_with_badges(server):
    _, base, _ = server
    _, body = get(base, "/api/tree")
    by_file = {f["file"]: f for f in body["files"]}
    assert set(by_file) == {
        "Doc.java", "DocCnt.java", "Engine.java",
        "Query.java", "TitleTable.java", "WordTable.java",
    }
    q = by_file["Query.java"]
    assert q["counts"]["nodes"] == 23
    assert q["counts"]["linked"] == 11
    assert all(r["badge"] == "clean" for r in q["roots"])
    labels = [r["label"]["raw"] for r in q["roots"]]
    assert "CS1" in labels and "SP1" in labels
    clause_roots = [r for r in q["roots"] if r["label"]["raw"] == "SP1"]
    assert any("REQUIRES" in r["clauses"] for r in clause_roots)


def test_node_detail_has_comment_and_code_text(server):
    _, base, _ = server
    _, body = get(base, f"/api/node/{ADDDOC_CS1}")
    assert body["file"] == "Query.java"
    assert body["linked"] is True
    assert "CS1" in body["commentText"]
    assert body["codeText"].strip().startswith("boolean")
    assert "class Query" in body["fileText"]


def test_unknown_node_is_404(server):
    _, base, _ = server
    with pytest.raises(urllib.error.HTTPError) as exc:
        get(base, "/api/node/" + "ff" * 8)
    assert exc.value.code == 404


def test_unknown_route_is_404(server):
    _, base, _ = server
    with pytest.raises(urllib.error.HTTPError) as exc:
        get(base, "/api/nothing")
    assert exc.value.code == 404


def test_diagnostics_empty_on_pristine_tree(server):
    _, base, _ = server
    _, body = get(base, "/api/diagnostics")
    assert body["diagnostics"] == []
    assert body["counts"] == {}


def test_check_endpoint_returns_verdict_and_updates_tree(server):
    _, base, _ = server
    status, body = post(base, "/api/check", {"nodeId": ADDDOC_CS1})
    assert status == 200
    assert body["verdict"]["outcome"] == "consistent"
    _, tree = get(base, "/api/tree")
    q = [f for f in tree["files"] if f["file"] == "Query.java"][0]
    node = [r for r in q["roots"] if r["id"] == ADDDOC_CS1][0]
    assert node["verdict"]["outcome"] == "consistent"


def test_check_endpoint_with_backend_override(server):
    _, base, _ = server
    status, body = post(
        base, "/api/check",
        {"nodeId": ADDDOC_CS1, "backend": "constant:inconsistent"},
    )
    assert status == 200
    assert body["verdict"]["outcome"] == "inconsistent"
    assert body["counts"].get("Inconsistent") == 1
    _, tree = get(base, "/api/tree")
    q = [f for f in tree["files"] if f["file"] == "Query.java"][0]
    assert q["counts"]["inconsistent"] == 1


def test_check_endpoint_sketch_only_node_is_400(server):
    srv, base, _ = server
    with srv.state.lock:
        fs = srv.state.scan.files["Query.java"]
        sketch_only = [n for n in fs.build.nodes if n not in fs.regions][0]
    assert post_status(base, "/api/check", {"nodeId": sketch_only}) == 400


def test_ack_without_staleness_is_409(server):
    _, base, _ = server
    assert post_status(base, "/api/ack", {"nodeId": ADDDOC_CS1}) == 409


def test_ack_unknown_node_is_404(server):
    _, base, _ = server
    assert post_status(base, "/api/ack", {"nodeId": "ff" * 8}) == 404


def test_malformed_post_body_is_400(server):
    _, base, _ = server
    req = urllib.request.Request(
        base + "/api/ack", data=b"not json", method="POST"
    )
    with pytest.raises(urllib.error.HTTPError) as exc:
        urllib.request.urlopen(req, timeout=10)
    assert exc.value.code == 400


def test_events_edit_then_ack_cycle(server):
    _, base, corpus = server
    tap = EventTap(base)
    first = tap.wait_for(1)[0]
    assert first["type"] == "diagnostics"
    assert first["counts"] == {}

    apply_bug_patch(corpus)
    events = tap.wait_for(2)
    assert events[1]["counts"] == {"StaleComment": 1}
    stale = events[1]["diagnostics"][0]
    assert stale["nodeId"] == ADDDOC_CS1

    status, _ = post(base, "/api/ack", {"nodeId": ADDDOC_CS1})
    assert status == 200
    events = tap.wait_for(3)
    assert events[-1]["counts"] == {}

    _, diag = get(base, "/api/diagnostics")
    assert diag["diagnostics"] == []


def test_badges_go_stale_after_live_edit(server):
    _, base, corpus = server
    tap = EventTap(base)
    tap.wait_for(1)
    apply_bug_patch(corpus)
    tap.wait_for(2)
    _, tree = get(base, "/api/tree")
    q = [f for f in tree["files"] if f["file"] == "Query.java"][0]
    badges = {r["id"]: r["badge"] for r in q["roots"]}
    assert badges[ADDDOC_CS1] == "stale"
    assert q["counts"]["stale"] == 1


def test_root_redirects_to_ui(server):
    _, base, _ = server

    class NoRedirect(urllib.request.HTTPRedirectHandler):
        def redirect_request(self, *args, **kwargs):
            return None

    opener = urllib.request.build_opener(NoRedirect)
    with pytest.raises(urllib.error.HTTPError) as exc:
        opener.open(base + "/", timeout=10)
    assert exc.value.code == 302
    assert exc.value.headers["Location"] == "/ui/"


def test_ui_without_bundle_serves_fallback_page(server):
    _, base, _ = server
    with urllib.request.urlopen(base + "/ui/", timeout=10) as resp:
        body = resp.read().decode("utf-8")
    assert "/api/status" in body


def test_ui_serves_bundle_and_guards_traversal(corpus_dir: Path, tmp_path: Path):
    config = CodatConfig()
    take_snapshot(corpus_dir, config)
    ui = tmp_path / "dist"
    ui.mkdir()
    (ui / "index.html").write_text("<html>bundle</html>", encoding="utf-8")
    (tmp_path / "secret.txt").write_text("hidden", encoding="utf-8")
    srv = CodatServer(corpus_dir, config, port=0, ui_dir=ui)
    srv.start_background()
    host, port = srv.address
    base = f"http://{host}:{port}"
    try:
        with urllib.request.urlopen(base + "/ui/", timeout=10) as resp:
            assert b"bundle" in resp.read()
        with pytest.raises(urllib.error.HTTPError) as exc:
            urllib.request.urlopen(base + "/ui/%2e%2e/secret.txt", timeout=10)
        assert exc.value.code == 404
    finally:
        srv.shutdown()
