"""Comment extraction, label and clause parsing, and tree building.

Grammar summary.  A label is a configured prefix plus a dotted numeric
path, at the start of a comment body, in colon form (CS1: text) or
whitespace form (CS1 text).  Adjacent single-line comments with the
same comment-token column and no blank line between them coalesce into
one record, but a line that parses as a new label always starts a new
record.  Clauses are keyword-tagged spans inside a body; a keyword line
with no text and no continuation lines yields no clause.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

from .config import PatternConfig, SyntaxProfile
from .hashes import collapse_ws, short_hash
from .model import (
    Anchor,
    Clause,
    CommentNode,
    CommentRecord,
    Diagnostic,
    Label,
    SourceRange,
    node_id_for,
)
from .scanning import (
    BLOCK,
    LINE,
    Block,
    LineIndex,
    Segment,
    brace_blocks,
    innermost_block,
    split_segments,
)


def _label_regex(config: PatternConfig) -> re.Pattern[str]:
    prefixes = sorted(config.prefixes, key=len, reverse=True)
    alt = "|".join(re.escape(p) for p in prefixes)
    # After the digits a label needs a colon, whitespace, or end of line;
    # anything else (CS2.x, CS2a) is prose, not a label.
    return re.compile(rf"^[ \t]*({alt})(\d+(?:\.\d+)*)(:|(?=[ \t])|$)")


def _match_label(body: str, config: PatternConfig) -> Optional[tuple[Label, int]]:
    """Match a label at the start of a body; also return where it ends."""
    first_line = body.split("\n", 1)[0]
    m = _label_regex(config).match(first_line)
    if not m:
        return None
    prefix, digits = m.group(1), m.group(2)
    label = Label(
        prefix=prefix,
        path=tuple(int(p) for p in digits.split(".")),
        raw=prefix + digits,
    )
    return label, m.end()


def parse_label(body: str, config: Optional[PatternConfig] = None) -> Optional[Label]:
    """Parse a leading label from a comment body, or None."""
    matched = _match_label(body, config or PatternConfig())
    return matched[0] if matched else None


def parse_clauses(body: str, config: Optional[PatternConfig] = None) -> list[Clause]:
    """Split a comment body into keyword-tagged clauses.

    Text before the first keyword line belongs to no clause.  A clause
    whose accumulated text is empty after trimming is dropped.
    """
    config = config or PatternConfig()
    table = config.keyword_table()
    clauses: list[Clause] = []
    current_kw: Optional[str] = None
    current_lines: list[str] = []

    def flush() -> None:
        nonlocal current_kw, current_lines
        if current_kw is not None:
            text = "\n".join(current_lines).strip()
            if text:
                clauses.append(Clause(keyword=current_kw, text=text))
        current_kw = None
        current_lines = []

    for line in body.split("\n"):
        stripped = line.lstrip(" \t")
        upper = stripped.upper()
        matched: Optional[tuple[str, str]] = None
        for spelling, canonical in table:
            if upper.startswith(spelling + ":"):
                matched = (canonical, stripped[len(spelling) + 1 :])
                break
        if matched:
            flush()
            current_kw, first_text = matched
            current_lines = [first_text]
        elif current_kw is not None:
            current_lines.append(line)
    flush()
    return clauses


def _annotate(record: CommentRecord, config: PatternConfig) -> CommentRecord:
    matched = _match_label(record.body, config)
    if matched:
        label, tag_end = matched
        remainder = record.body[tag_end:]
    else:
        label, remainder = None, record.body
    clauses = tuple(parse_clauses(remainder, config))
    return CommentRecord(
        file=record.file,
        kind=record.kind,
        range=record.range,
        body=record.body,
        label=label,
        clauses=clauses,
    )


def extract_comments(
    source: bytes | str,
    profile: Optional[SyntaxProfile] = None,
    config: Optional[PatternConfig] = None,
    file: str = "<memory>",
) -> tuple[list[CommentRecord], list[Diagnostic]]:
    """Extract coalesced, annotated comment records from one file."""
    profile = profile or SyntaxProfile()
    config = config or PatternConfig()
    data = source.encode("utf-8") if isinstance(source, str) else source
    segments, problems = split_segments(data, profile)
    index = LineIndex(data)
    records: list[CommentRecord] = []
    diagnostics: list[Diagnostic] = []

    lc_len = len(profile.line_comment)
    bo_len = len(profile.block_open)
    bc_len = len(profile.block_close)

    def seg_range(start: int, end: int) -> SourceRange:
        return SourceRange(
            start=start,
            end=end,
            start_line=index.line_of(start),
            end_line=index.line_of(max(start, end - 1)),
        )

    # (segment, line, column, text-after-token) for each line comment.
    items: list[tuple[Segment, int, int, str]] = []
    for seg in segments:
        if seg.kind == LINE:
            line = index.line_of(seg.start)
            col = seg.start - index.span(line)[0]
            text = data[seg.start + lc_len : seg.end].decode("utf-8", "replace")
            items.append((seg, line, col, text))
        elif seg.kind == BLOCK:
            terminated = (
                seg.end - seg.start >= bo_len + bc_len
                and data[seg.end - bc_len : seg.end] == profile.block_close.encode("ascii")
            )
            body_end = seg.end - bc_len if terminated else seg.end
            body = data[seg.start + bo_len : body_end].decode("utf-8", "replace")
            records.append(
                CommentRecord(
                    file=file,
                    kind="block",
                    range=seg_range(seg.start, seg.end),
                    body=body,
                )
            )

    group: list[tuple[Segment, int, int, str]] = []

    def flush_group() -> None:
        nonlocal group
        if not group:
            return
        body = "\n".join(item[3] for item in group)
        records.append(
            CommentRecord(
                file=file,
                kind="line",
                range=seg_range(group[0][0].start, group[-1][0].end),
                body=body,
            )
        )
        group = []

    for item in items:
        _, line, col, text = item
        if group:
            _, prev_line, prev_col, _ = group[-1]
            adjacent = line == prev_line + 1 and col == prev_col
            if not adjacent or _match_label(text, config):
                flush_group()
        group.append(item)
    flush_group()

    records.sort(key=lambda r: r.range.start)
    records = [_annotate(r, config) for r in records]

    for problem in problems:
        line = index.line_of(problem.offset)
        diagnostics.append(
            Diagnostic(
                kind="GrammarViolation",
                file=file,
                message=f"{problem.message} at line {line}",
                severity="warning",
                comment_range=seg_range(problem.offset, max(len(data), problem.offset + 1)),
            )
        )
    return records, diagnostics


def _context_hash(index: LineIndex, record_range: SourceRange) -> str:
    def line_or_empty(line: int) -> bytes:
        if 1 <= line <= index.count:
            return index.text(line)
        return b""

    before = line_or_empty(record_range.start_line - 1)
    after = line_or_empty(record_range.end_line + 1)
    joined = collapse_ws(before.decode("utf-8", "replace")) + "|" + collapse_ws(
        after.decode("utf-8", "replace")
    )
    return short_hash(joined)


def make_anchor(record: CommentRecord, index: LineIndex) -> Anchor:
    return Anchor(
        file=record.file,
        range=record.range,
        text_hash=record.text_hash,
        context_hash=_context_hash(index, record.range),
        status="valid",
    )


@dataclass
class TreeBuild:
    """Per-file tree assembly output, with lookup tables for later stages."""

    roots: tuple[CommentNode, ...]
    nodes: dict[str, CommentNode]
    unlabeled: tuple[CommentRecord, ...]
    diagnostics: list[Diagnostic] = field(default_factory=list)
    scope_by_node: dict[str, str] = field(default_factory=dict)
    anchor_records: dict[str, tuple[CommentRecord, ...]] = field(default_factory=dict)


def build_tree(
    records: list[CommentRecord],
    file: str,
    source: Optional[bytes] = None,
    profile: Optional[SyntaxProfile] = None,
    blocks: Optional[list[Block]] = None,
    index: Optional[LineIndex] = None,
) -> TreeBuild:
    """Group labeled records into nodes and wire up the hierarchy.

    Records with the same label in the same innermost brace block merge
    into one multi-anchor node; the same label in different blocks makes
    distinct nodes, told apart by an ordinal in the node id.
    """
    if source is not None and blocks is None:
        profile = profile or SyntaxProfile()
        segments, _ = split_segments(source, profile)
        index = index or LineIndex(source)
        blocks, _ = brace_blocks(source, segments, index)
    if index is None:
        joined = "\n".join(r.body for r in records).encode("utf-8")
        index = LineIndex(source if source is not None else joined or b"\n")

    def scope_of(record: CommentRecord) -> tuple[int, str]:
        if not blocks:
            return -1, ""
        block = innermost_block(blocks, record.range.start)
        return (block.open, block.header) if block else (-1, "")

    labeled = [r for r in records if r.label]
    unlabeled = tuple(r for r in records if not r.label)

    groups: dict[tuple[str, str, int], list[CommentRecord]] = {}
    scope_headers: dict[tuple[str, str, int], str] = {}
    order: list[tuple[str, str, int]] = []
    for record in labeled:
        scope_key, header = scope_of(record)
        key = (record.label.prefix, record.label.dotted, scope_key)
        if key not in groups:
            groups[key] = []
            order.append(key)
            scope_headers[key] = header
        groups[key].append(record)

    # Ordinals number same-labeled groups by first-anchor position.
    by_label: dict[tuple[str, str], list[tuple[int, tuple[str, str, int]]]] = {}
    for key in order:
        first = min(r.range.start for r in groups[key])
        by_label.setdefault((key[0], key[1]), []).append((first, key))
    ordinals: dict[tuple[str, str, int], int] = {}
    for entries in by_label.values():
        entries.sort()
        for ordinal, (_, key) in enumerate(entries):
            ordinals[key] = ordinal

    diagnostics: list[Diagnostic] = []
    raw_nodes: list[dict] = []
    for key in order:
        recs = sorted(groups[key], key=lambda r: r.range.start)
        node_id = node_id_for(file, key[0], key[1], ordinals[key])
        raw_nodes.append(
            {
                "id": node_id,
                "label": recs[0].label,
                "records": recs,
                "first": recs[0].range.start,
                "scope_header": scope_headers[key],
            }
        )
    raw_nodes.sort(key=lambda n: n["first"])

    parent_of: dict[str, Optional[str]] = {}
    for pos, raw in enumerate(raw_nodes):
        label: Label = raw["label"]
        parent_id = None
        if label.depth > 1:
            for prev in reversed(raw_nodes[:pos]):
                if label.extends(prev["label"]):
                    parent_id = prev["id"]
                    break
            if parent_id is None:
                diagnostics.append(
                    Diagnostic(
                        kind="GrammarViolation",
                        file=file,
                        message=(
                            f"label {label.raw} has no preceding ancestor; "
                            "treating it as a root"
                        ),
                        severity="warning",
                        node_id=raw["id"],
                        comment_range=raw["records"][0].range,
                    )
                )
        parent_of[raw["id"]] = parent_id

    children_of: dict[str, list[tuple[tuple, str]]] = {r["id"]: [] for r in raw_nodes}
    for raw in raw_nodes:
        pid = parent_of[raw["id"]]
        if pid is not None:
            children_of[pid].append((raw["label"].sort_key(), raw["id"]))

    nodes: dict[str, CommentNode] = {}
    scope_by_node: dict[str, str] = {}
    anchor_records: dict[str, tuple[CommentRecord, ...]] = {}
    roots: list[CommentNode] = []
    for raw in raw_nodes:
        node_id = raw["id"]
        anchors = tuple(make_anchor(r, index) for r in raw["records"])
        kids = tuple(cid for _, cid in sorted(children_of[node_id]))
        node = CommentNode(
            id=node_id,
            label=raw["label"],
            anchors=anchors,
            children=kids,
            parent_id=parent_of[node_id],
        )
        nodes[node_id] = node
        scope_by_node[node_id] = raw["scope_header"]
        anchor_records[node_id] = tuple(raw["records"])
        if node.parent_id is None:
            roots.append(node)

    return TreeBuild(
        roots=tuple(roots),
        nodes=nodes,
        unlabeled=unlabeled,
        diagnostics=diagnostics,
        scope_by_node=scope_by_node,
        anchor_records=anchor_records,
    )
