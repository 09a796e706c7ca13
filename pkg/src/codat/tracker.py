"""Snapshots, diffing, acknowledgement, and the watch loop.

The snapshot lives at <root>/.codat/snapshot.json and is written
atomically: serialize to a temp file in the same directory, fsync, then
rename over the target, rotating the previous snapshot to
snapshot.prev.json first.  A crash mid-write can never corrupt the
stored baseline.
"""

from __future__ import annotations

import json
import logging
import os
import queue
import threading
import time
from dataclasses import replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Optional

from .config import CodatConfig
from .engine import ProjectScan, project_files, rescan_paths, scan_project
from .errors import (
    NothingToAcknowledge,
    ProjectRootMismatch,
    SnapshotCorrupt,
    SnapshotMissing,
    UnknownNode,
)
from .model import Anchor, CommentRecord, Diagnostic, FileEntry, Snapshot
from .parser import extract_comments

log = logging.getLogger("codat.tracker")

SNAPSHOT_DIR = ".codat"
SNAPSHOT_NAME = "snapshot.json"
SNAPSHOT_PREV = "snapshot.prev.json"


def snapshot_path(root: Path | str) -> Path:
    return Path(root) / SNAPSHOT_DIR / SNAPSHOT_NAME


def _atomic_write(path: Path, payload: bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(payload)
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, path)


def serialize_snapshot(snapshot: Snapshot) -> bytes:
    # Deterministic: key order and separators are fixed, so equal states
    # serialize byte-identically apart from createdAt.
    text = json.dumps(snapshot.to_dict(), indent=2, sort_keys=True) + "\n"
    return text.encode("utf-8")


def write_snapshot(snapshot: Snapshot, root: Path | str) -> Path:
    """Persist a snapshot, rotating any existing one to snapshot.prev.json."""
    target = snapshot_path(root)
    if target.is_file():
        _atomic_write(target.with_name(SNAPSHOT_PREV), target.read_bytes())
    _atomic_write(target, serialize_snapshot(snapshot))
    return target


def load_snapshot(root: Path | str) -> Snapshot:
    """Load the stored snapshot, falling back to the rotated copy."""
    target = snapshot_path(root)
    candidates = [target, target.with_name(SNAPSHOT_PREV)]
    last_error: Optional[Exception] = None
    for idx, path in enumerate(candidates):
        if not path.is_file():
            continue
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
            snap = Snapshot.from_dict(data)
            if idx == 1:
                log.warning("loaded rotated snapshot %s", path)
            return snap
        except Exception as exc:  # decode or shape error; try the rotated copy
            last_error = exc
    if last_error is not None:
        raise SnapshotCorrupt(f"cannot load snapshot under {root}: {last_error}")
    raise SnapshotMissing(f"no snapshot found under {root}; run scan first")


def snapshot_from_scan(scan: ProjectScan, acknowledged: frozenset = frozenset()) -> Snapshot:
    files = {
        path: FileEntry(
            file_hash=fs.file_hash,
            records=tuple(fs.records),
            links=tuple(fs.links),
        )
        for path, fs in sorted(scan.files.items())
    }
    return Snapshot(
        project_root=str(scan.root),
        created_at=datetime.now(timezone.utc).isoformat(),
        files=files,
        acknowledged=acknowledged,
    )


def take_snapshot(
    root: Path | str,
    config: Optional[CodatConfig] = None,
    scan: Optional[ProjectScan] = None,
    persist: bool = True,
) -> Snapshot:
    """Scan the project and store the result as the new baseline.

    Acknowledged pairs from any existing snapshot are carried forward,
    so re-baselining never forgets what the user accepted.
    """
    root = Path(root).resolve()
    scan = scan or scan_project(root, config)
    acknowledged: frozenset = frozenset()
    try:
        acknowledged = load_snapshot(root).acknowledged
    except (SnapshotMissing, SnapshotCorrupt):
        pass
    snapshot = snapshot_from_scan(scan, acknowledged)
    if persist:
        write_snapshot(snapshot, root)
    return snapshot


def reanchor(
    old: Anchor,
    new_source: bytes,
    config: Optional[CodatConfig] = None,
    candidates: Optional[list[CommentRecord]] = None,
) -> Anchor:
    """Find an old anchor's comment in the new text of the same file.

    Exact position match keeps the anchor valid; a body-hash match
    elsewhere relocates it (nearest line wins, then matching context,
    then the earlier one); no match orphans it.
    """
    config = config or CodatConfig()
    if candidates is None:
        candidates, _ = extract_comments(
            new_source, config.syntax, config.patterns, file=old.file
        )
    from .parser import make_anchor  # local import to avoid a cycle
    from .scanning import LineIndex

    index = LineIndex(new_source)
    matches = [
        make_anchor(rec, index) for rec in candidates if rec.text_hash == old.text_hash
    ]
    if not matches:
        return replace(old, status="orphaned")
    for cand in matches:
        if cand.range.start == old.range.start:
            return replace(old, range=cand.range, status="valid")

    def rank(cand: Anchor) -> tuple:
        distance = abs(cand.range.start_line - old.range.start_line)
        context_differs = 0 if cand.context_hash == old.context_hash else 1
        return (distance, context_differs, cand.range.start)

    best = min(matches, key=rank)
    return replace(
        old,
        range=best.range,
        context_hash=best.context_hash,
        status="relocated",
    )


def diff(old: Snapshot, current: ProjectScan) -> list[Diagnostic]:
    """Compare a stored baseline against the current scan.

    Staleness is judged per link: same node on both sides, different
    code fingerprint, and not acknowledged for the new fingerprint.
    """
    if str(current.root) != old.project_root:
        raise ProjectRootMismatch(
            f"snapshot was taken for {old.project_root}, not {current.root}"
        )
    diagnostics: list[Diagnostic] = []
    current_nodes = current.nodes()

    for path, entry in sorted(old.files.items()):
        fs = current.files.get(path)
        if fs is None:
            for link in entry.links:
                diagnostics.append(
                    Diagnostic(
                        kind="BrokenLink",
                        file=path,
                        message=f"file vanished; node {link.node_id} lost its code",
                        severity="error",
                        node_id=link.node_id,
                        code_range=link.code_range,
                    )
                )
            continue

        if fs.file_hash != entry.file_hash:
            # Re-anchor each labeled comment from the baseline.
            for record in entry.records:
                if record.label is None:
                    continue
                anchor = Anchor(
                    file=path,
                    range=record.range,
                    text_hash=record.text_hash,
                    context_hash="",
                    status="valid",
                )
                moved = reanchor(
                    anchor, fs.data, current.config, candidates=fs.records
                )
                if moved.status == "orphaned":
                    diagnostics.append(
                        Diagnostic(
                            kind="OrphanedComment",
                            file=path,
                            message=(
                                f"labeled comment {record.label.raw} from the "
                                "baseline no longer appears in the file"
                            ),
                            severity="warning",
                            comment_range=record.range,
                        )
                    )

        current_links = {link.node_id: link for link in fs.links}
        for link in entry.links:
            now = current_links.get(link.node_id)
            if now is None:
                continue
            if now.code_fingerprint == link.code_fingerprint:
                continue
            if (link.node_id, now.code_fingerprint) in old.acknowledged:
                continue
            node = current_nodes.get(link.node_id)
            comment_range = (
                node[1].first_anchor.range if node else link.code_range
            )
            label = node[1].label.raw if node else link.node_id
            diagnostics.append(
                Diagnostic(
                    kind="StaleComment",
                    file=path,
                    message=(
                        f"code linked to {label} changed since the snapshot; "
                        "update the comment or acknowledge the change"
                    ),
                    severity="error",
                    node_id=link.node_id,
                    comment_range=comment_range,
                    code_range=now.code_range,
                )
            )

    return sorted(diagnostics, key=lambda d: d.sort_key())


def acknowledge(
    node_id: str,
    snapshot: Snapshot,
    scan: ProjectScan,
) -> Snapshot:
    """Accept the current code for a stale node.

    The stored link is re-baselined to the current fingerprint and the
    (node, fingerprint) pair is recorded so the finding stays suppressed
    even if the code is later reverted and re-edited.
    """
    nodes = scan.nodes()
    if node_id not in nodes:
        raise UnknownNode(f"no node with id {node_id}")
    findings = [
        d for d in diff(snapshot, scan) if d.kind == "StaleComment" and d.node_id == node_id
    ]
    if not findings:
        raise NothingToAcknowledge(f"node {node_id} has no staleness finding")

    path, _ = nodes[node_id]
    current_link = scan.links()[node_id]
    entry = snapshot.files[path]
    new_links = tuple(
        current_link if link.node_id == node_id else link for link in entry.links
    )
    new_files = dict(snapshot.files)
    new_files[path] = FileEntry(
        file_hash=entry.file_hash, records=entry.records, links=new_links
    )
    acknowledged = snapshot.acknowledged | {(node_id, current_link.code_fingerprint)}
    return replace(snapshot, files=new_files, acknowledged=frozenset(acknowledged))


class _StatPoller(threading.Thread):
    """Fallback file watcher: polls stat() results for matching files."""

    def __init__(
        self,
        root: Path,
        config: CodatConfig,
        events: "queue.Queue[Optional[str]]",
        stop_event: threading.Event,
    ):
        super().__init__(daemon=True, name="codat-poller")
        self.root = root
        self.config = config
        self.events = events
        self.stop_event = stop_event
        self.interval = config.watch.poll_interval_ms / 1000.0
        self._state: dict[str, tuple[int, int]] = self._stat_all()

    def _stat_all(self) -> dict[str, tuple[int, int]]:
        state: dict[str, tuple[int, int]] = {}
        for rel in project_files(self.root, self.config):
            try:
                st = os.stat(self.root / rel)
            except OSError:
                continue
            state[rel] = (st.st_mtime_ns, st.st_size)
        return state

    def run(self) -> None:
        while not self.stop_event.wait(self.interval):
            fresh = self._stat_all()
            changed = set(fresh) ^ set(self._state)
            for rel in set(fresh) & set(self._state):
                if fresh[rel] != self._state[rel]:
                    changed.add(rel)
            self._state = fresh
            for rel in sorted(changed):
                self.events.put(rel)


def _start_observer(
    root: Path,
    config: CodatConfig,
    events: "queue.Queue[Optional[str]]",
    stop_event: threading.Event,
) -> Callable[[], None]:
    """Start a native file watcher when available, else the stat poller."""
    try:
        from watchdog.events import FileSystemEventHandler
        from watchdog.observers import Observer
    except ImportError:
        log.warning(
            "native file watching unavailable; polling every %d ms",
            config.watch.poll_interval_ms,
        )
        poller = _StatPoller(root, config, events, stop_event)
        poller.start()
        return lambda: None

    class _Handler(FileSystemEventHandler):
        def on_any_event(self, event) -> None:
            for path in filter(None, [getattr(event, "src_path", None), getattr(event, "dest_path", None)]):
                if config.syntax.matches(path):
                    rel = os.path.relpath(path, root)
                    events.put(Path(rel).as_posix())

    observer = Observer()
    observer.schedule(_Handler(), str(root), recursive=True)
    observer.start()

    def stop() -> None:
        observer.stop()
        observer.join(timeout=5)

    return stop


class Watcher:
    """Incremental re-diff loop over file change events.

    Emits the full current diagnostic set to the sink whenever that set
    changes; a touch that does not change content emits nothing.  On
    clean shutdown the baseline (with any acknowledgements added while
    running) is persisted.
    """

    def __init__(
        self,
        root: Path | str,
        config: Optional[CodatConfig] = None,
        sink: Optional[Callable[[list[Diagnostic]], None]] = None,
        baseline: Optional[Snapshot] = None,
        emit_initial: bool = False,
    ):
        self.root = Path(root).resolve()
        self.config = config or CodatConfig()
        self.sink = sink or (lambda batch: None)
        self.baseline = baseline if baseline is not None else load_snapshot(self.root)
        self.emit_initial = emit_initial
        self.stop_event = threading.Event()
        self.events: "queue.Queue[Optional[str]]" = queue.Queue()
        self._last_key: Optional[tuple] = None
        self.scan: Optional[ProjectScan] = None

    def poke(self) -> None:
        """Force a re-diff, e.g. after the baseline changed via ack."""
        self.events.put(None)

    def stop(self) -> None:
        self.stop_event.set()
        self.events.put(None)

    def _emit_if_changed(self) -> None:
        diags = diff(self.baseline, self.scan)
        key = tuple(
            json.dumps(d.to_dict(), sort_keys=True) for d in diags
        )
        if key != self._last_key:
            self._last_key = key
            self.sink(list(diags))

    def run(self) -> None:
        # Observe before the first scan: an edit arriving while the scan
        # runs is then either in the scan already or in the event queue.
        stop_observer = _start_observer(
            self.root, self.config, self.events, self.stop_event
        )
        debounce = self.config.watch.debounce_ms / 1000.0
        try:
            self.scan = scan_project(self.root, self.config)
            initial = diff(self.baseline, self.scan)
            self._last_key = tuple(
                json.dumps(d.to_dict(), sort_keys=True) for d in initial
            )
            if self.emit_initial or initial:
                self.sink(list(initial))
            while not self.stop_event.is_set():
                try:
                    first = self.events.get(timeout=0.2)
                except queue.Empty:
                    continue
                if self.stop_event.is_set():
                    break
                changed: set[str] = set()
                if first is not None:
                    changed.add(first)
                # Debounce: wait until the event stream has been quiet.
                deadline = time.monotonic() + debounce
                while True:
                    remaining = deadline - time.monotonic()
                    if remaining <= 0:
                        break
                    try:
                        nxt = self.events.get(timeout=remaining)
                    except queue.Empty:
                        break
                    if nxt is not None:
                        changed.add(nxt)
                    deadline = time.monotonic() + debounce
                    if self.stop_event.is_set():
                        break
                if self.stop_event.is_set():
                    break
                if changed:
                    rescan_paths(self.scan, changed)
                self._emit_if_changed()
        finally:
            stop_observer()
            try:
                write_snapshot(self.baseline, self.root)
            except OSError as exc:
                log.warning("could not persist baseline on shutdown: %s", exc)


def watch(
    root: Path | str,
    config: Optional[CodatConfig] = None,
    sink: Optional[Callable[[list[Diagnostic]], None]] = None,
    stop_event: Optional[threading.Event] = None,
    emit_initial: bool = False,
) -> Watcher:
    """Run the watch loop until the stop event fires (blocking)."""
    watcher = Watcher(root, config, sink, emit_initial=emit_initial)
    if stop_event is not None:
        watcher.stop_event = stop_event
    watcher.run()
    return watcher
