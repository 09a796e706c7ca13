from __future__ import annotations

import json
import threading
import time
from pathlib import Path

import pytest

from codat.config import CodatConfig
from codat.engine import scan_project
from codat.errors import (
    NothingToAcknowledge,
    ProjectRootMismatch,
    SnapshotCorrupt,
    SnapshotMissing,
    UnknownNode,
)
from codat.tracker import (
    Watcher,
    acknowledge,
    diff,
    load_snapshot,
    reanchor,
    serialize_snapshot,
    snapshot_path,
    take_snapshot,
    write_snapshot,
)

ADDDOC_CS1 = "0ba1b4ffa1eac999"


def rescan(root: Path) -> object:
    return scan_project(root, CodatConfig())


def patch_query(root: Path) -> None:
    from codat.corpus import apply_bug_patch

    apply_bug_patch(root)


def test_take_snapshot_writes_file(corpus_dir: Path):
    snap = take_snapshot(corpus_dir)
    assert snapshot_path(corpus_dir).is_file()
    assert snap.schema_version == 1
    assert set(snap.files) == {
        "Doc.java", "DocCnt.java", "Engine.java",
        "Query.java", "TitleTable.java", "WordTable.java",
    }


def test_snapshot_round_trips_through_disk(corpus_dir: Path):
    snap = take_snapshot(corpus_dir)
    loaded = load_snapshot(corpus_dir)
    assert loaded == snap


def test_snapshot_serialization_is_deterministic(corpus_dir: Path):
    snap = take_snapshot(corpus_dir)
    assert serialize_snapshot(snap) == serialize_snapshot(snap)
    text = serialize_snapshot(snap).decode("utf-8")
    payload = json.loads(text)
    assert payload["schemaVersion"] == 1
    assert text == json.dumps(payload, indent=2, sort_keys=True) + "\n"


def test_rewrite_rotates_previous_snapshot(corpus_dir: Path):
    take_snapshot(corpus_dir)
    first = snapshot_path(corpus_dir).read_bytes()
    take_snapshot(corpus_dir)
    prev = snapshot_path(corpus_dir).with_name("snapshot.prev.json")
    assert prev.is_file()
    assert json.loads(prev.read_bytes())["schemaVersion"] == 1
    assert json.loads(first)["projectRoot"] == json.loads(prev.read_bytes())["projectRoot"]


def test_load_falls_back_to_previous_on_corruption(corpus_dir: Path):
    take_snapshot(corpus_dir)
    take_snapshot(corpus_dir)
    snapshot_path(corpus_dir).write_text("{ not json", encoding="utf-8")
    loaded = load_snapshot(corpus_dir)
    assert loaded.schema_version == 1


def test_load_missing_snapshot_raises(tmp_path: Path):
    with pytest.raises(SnapshotMissing):
        load_snapshot(tmp_path)


def test_load_corrupt_without_fallback_raises(corpus_dir: Path):
    take_snapshot(corpus_dir)
    snapshot_path(corpus_dir).write_text("{ not json", encoding="utf-8")
    with pytest.raises(SnapshotCorrupt):
        load_snapshot(corpus_dir)


def test_diff_requires_matching_root(corpus_dir: Path, tmp_path: Path):
    snap = take_snapshot(corpus_dir)
    from codat.corpus import load_corpus

    other = load_corpus(tmp_path / "other")
    with pytest.raises(ProjectRootMismatch):
        diff(snap, rescan(other))


def test_zero_edit_diff_is_empty(corpus_dir: Path):
    snap = take_snapshot(corpus_dir)
    assert diff(snap, rescan(corpus_dir)) == []


def test_code_edit_inside_region_goes_stale(corpus_dir: Path):
    snap = take_snapshot(corpus_dir)
    patch_query(corpus_dir)
    findings = diff(snap, rescan(corpus_dir))
    assert [d.kind for d in findings] == ["StaleComment"]
    d = findings[0]
    assert d.node_id == ADDDOC_CS1
    assert d.severity == "error"
    assert d.file == "Query.java"
    assert d.comment_range is not None and d.code_range is not None
    assert d.code_range.contains_line(181)


def test_comment_text_edit_orphans_old_record_without_staleness(corpus_dir: Path):
    snap = take_snapshot(corpus_dir)
    path = corpus_dir / "Query.java"
    text = path.read_text(encoding="utf-8")
    assert "//CS1:  Add w to keys" in text
    path.write_text(
        text.replace("//CS1:  Add w to keys", "//CS1:  Append w to the key list"),
        encoding="utf-8",
    )
    findings = diff(snap, rescan(corpus_dir))
    # The reworded comment is a new record; the old one is unfindable.
    assert [d.kind for d in findings] == ["OrphanedComment"]
    assert findings[0].severity == "warning"


def test_inserted_comment_lines_relocate_anchors_silently(corpus_dir: Path):
    snap = take_snapshot(corpus_dir)
    path = corpus_dir / "Query.java"
    lines = path.read_text(encoding="utf-8").splitlines(keepends=True)
    lines.insert(154, "  // a new remark between methods\n")
    path.write_text("".join(lines), encoding="utf-8")
    findings = diff(snap, rescan(corpus_dir))
    assert findings == []


def test_deleting_a_labeled_comment_orphans_it(corpus_dir: Path):
    snap = take_snapshot(corpus_dir)
    path = corpus_dir / "Query.java"
    lines = path.read_text(encoding="utf-8").splitlines(keepends=True)
    # Line 50 holds the AS0 assertion comment inside the constructor.
    assert "AS0" in lines[49]
    del lines[49]
    path.write_text("".join(lines), encoding="utf-8")
    findings = diff(snap, rescan(corpus_dir))
    orphaned = [d for d in findings if d.kind == "OrphanedComment"]
    assert len(orphaned) == 1
    assert orphaned[0].severity == "warning"


def test_deleting_a_file_breaks_its_links(corpus_dir: Path):
    snap = take_snapshot(corpus_dir)
    (corpus_dir / "Query.java").unlink()
    findings = diff(snap, rescan(corpus_dir))
    broken = [d for d in findings if d.kind == "BrokenLink"]
    assert len(broken) == 11
    assert all(d.file == "Query.java" for d in broken)


def test_diff_output_is_sorted_and_stable(corpus_dir: Path):
    snap = take_snapshot(corpus_dir)
    patch_query(corpus_dir)
    (corpus_dir / "Engine.java").unlink()
    first = diff(snap, rescan(corpus_dir))
    second = diff(snap, rescan(corpus_dir))
    assert first == second
    keys = [d.sort_key() for d in first]
    assert keys == sorted(keys)


def test_acknowledge_suppresses_current_finding(corpus_dir: Path):
    snap = take_snapshot(corpus_dir)
    patch_query(corpus_dir)
    scan = rescan(corpus_dir)
    acked = acknowledge(ADDDOC_CS1, snap, scan)
    assert diff(acked, scan) == []
    assert (ADDDOC_CS1, scan.links()[ADDDOC_CS1].code_fingerprint) in acked.acknowledged


def test_acknowledge_rejects_clean_node(corpus_dir: Path):
    snap = take_snapshot(corpus_dir)
    with pytest.raises(NothingToAcknowledge):
        acknowledge(ADDDOC_CS1, snap, rescan(corpus_dir))


def test_acknowledge_rejects_unknown_node(corpus_dir: Path):
    snap = take_snapshot(corpus_dir)
    with pytest.raises(UnknownNode):
        acknowledge("ff" * 8, snap, rescan(corpus_dir))


def test_revert_after_acknowledge_flags_again(corpus_dir: Path):
    snap = take_snapshot(corpus_dir)
    pristine = (corpus_dir / "Query.java").read_bytes()
    patch_query(corpus_dir)
    acked = acknowledge(ADDDOC_CS1, snap, rescan(corpus_dir))
    # Back to the original text: drift from the acknowledged baseline.
    (corpus_dir / "Query.java").write_bytes(pristine)
    findings = diff(acked, rescan(corpus_dir))
    assert [d.kind for d in findings] == ["StaleComment"]
    assert findings[0].node_id == ADDDOC_CS1


def test_acknowledgements_survive_rebaselining(corpus_dir: Path):
    take_snapshot(corpus_dir)
    patch_query(corpus_dir)
    scan = rescan(corpus_dir)
    acked = acknowledge(ADDDOC_CS1, load_snapshot(corpus_dir), scan)
    write_snapshot(acked, corpus_dir)
    again = take_snapshot(corpus_dir)
    assert acked.acknowledged <= again.acknowledged


def test_reanchor_keeps_exact_position_valid(corpus_dir: Path):
    snap = take_snapshot(corpus_dir)
    entry = snap.files["Query.java"]
    labeled = [r for r in entry.records if r.label]
    from codat.parser import make_anchor
    from codat.scanning import LineIndex

    data = (corpus_dir / "Query.java").read_bytes()
    anchor = make_anchor(labeled[0], LineIndex(data))
    moved = reanchor(anchor, data)
    assert moved.status == "valid"


def test_reanchor_relocates_to_nearest_duplicate():
    src = (
        b"void m() {\n"
        b"  // CS1: duplicated body\n"
        b"  int a;\n"
        b"}\n"
        b"void n() {\n"
        b"  // CS1: duplicated body\n"
        b"  int b;\n"
        b"}\n"
    )
    from codat.parser import extract_comments, make_anchor
    from codat.scanning import LineIndex

    records, _ = extract_comments(src, file="T.java")
    labeled = [r for r in records if r.label]
    anchor = make_anchor(labeled[0], LineIndex(src))

    # Shift everything down; the old offset no longer matches.
    shifted = b"int pad;\n" + src
    moved = reanchor(anchor, shifted)
    assert moved.status == "relocated"
    assert moved.range.start_line == 3


def test_reanchor_orphans_vanished_comment():
    src = b"// CS1: here today\nint a;\n"
    from codat.parser import extract_comments, make_anchor
    from codat.scanning import LineIndex

    records, _ = extract_comments(src, file="T.java")
    anchor = make_anchor(records[0], LineIndex(src))
    moved = reanchor(anchor, b"int a;\n")
    assert moved.status == "orphaned"


def test_watcher_emits_batch_after_edit(corpus_dir: Path):
    take_snapshot(corpus_dir)
    batches: list[list] = []
    got_one = threading.Event()

    def sink(batch):
        batches.append(batch)
        got_one.set()

    watcher = Watcher(corpus_dir, CodatConfig(), sink)
    thread = threading.Thread(target=watcher.run, daemon=True)
    thread.start()
    try:
        time.sleep(0.8)
        patch_query(corpus_dir)
        assert got_one.wait(timeout=10.0), "no batch arrived"
    finally:
        watcher.stop()
        thread.join(timeout=10.0)
    kinds = [d.kind for d in batches[-1]]
    assert kinds == ["StaleComment"]


def test_watcher_ignores_touch_without_content_change(corpus_dir: Path):
    take_snapshot(corpus_dir)
    batches: list[list] = []

    watcher = Watcher(corpus_dir, CodatConfig(), batches.append)
    thread = threading.Thread(target=watcher.run, daemon=True)
    thread.start()
    try:
        time.sleep(0.8)
        (corpus_dir / "Query.java").touch()
        time.sleep(1.5)
    finally:
        watcher.stop()
        thread.join(timeout=10.0)
    assert batches == []


def test_watcher_persists_baseline_on_stop(corpus_dir: Path):
    snap = take_snapshot(corpus_dir)
    watcher = Watcher(corpus_dir, CodatConfig(), lambda batch: None)
    thread = threading.Thread(target=watcher.run, daemon=True)
    thread.start()
    time.sleep(0.5)
    watcher.stop()
    thread.join(timeout=10.0)
    assert load_snapshot(corpus_dir).files.keys() == snap.files.keys()
