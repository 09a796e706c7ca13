"""Binding labeled nodes to the code regions they describe.

Region rule, per anchor: the region starts at the first code line after
the anchor's comment record and ends before the first of (a) the next
labeled comment whose label depth is less than or equal to the anchor's,
(b) the closing brace of the enclosing block, or (c) end of file.
Trailing blank lines are trimmed; trailing comment-only lines are kept.
An anchor immediately followed by another labeled comment contributes
an empty region, which is how sketch lines with inline twins stay
sketch-only.

When more than one anchor of a node contributes a non-empty region,
the node links to the last contribution in source order: the inline
implementation site.  A region never overlaps the node's own comments.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .config import SyntaxProfile
from .hashes import full_hash
from .model import CodeLink, CommentNode, CommentRecord, Diagnostic, SourceRange
from .parser import TreeBuild
from .scanning import (
    Block,
    LineIndex,
    brace_blocks,
    innermost_block,
    line_flags,
    normalize_code,
    split_segments,
)


def fingerprint(code: bytes | str, profile: Optional[SyntaxProfile] = None) -> str:
    """Content hash of a code slice, blind to comments and whitespace.

    Comments collapse to a single space, whitespace runs outside string
    literals collapse to a single space, and string literals count
    verbatim, delimiters included.
    """
    return full_hash(normalize_code(code, profile or SyntaxProfile()))


@dataclass
class FileGeometry:
    """Precomputed per-file facts the region rule needs."""

    index: LineIndex
    blocks: list[Block]
    balanced: bool
    has_code: list[bool]
    blank: list[bool]
    labeled_marks: list[tuple[int, int]]  # (start line, label depth)

    @classmethod
    def build(
        cls,
        data: bytes,
        records: list[CommentRecord],
        profile: SyntaxProfile,
    ) -> "FileGeometry":
        segments, _ = split_segments(data, profile)
        index = LineIndex(data)
        blocks, balanced = brace_blocks(data, segments, index)
        has_code, blank = line_flags(data, segments, index)
        marks = [
            (r.range.start_line, r.label.depth) for r in records if r.label is not None
        ]
        marks.sort()
        return cls(
            index=index,
            blocks=blocks,
            balanced=balanced,
            has_code=has_code,
            blank=blank,
            labeled_marks=marks,
        )


def _anchor_region_lines(
    record: CommentRecord, geo: FileGeometry
) -> Optional[tuple[int, int]]:
    depth = record.label.depth if record.label else 1
    after = record.range.end_line

    start = None
    for line in range(after + 1, geo.index.count + 1):
        if geo.has_code[line]:
            start = line
            break
    if start is None:
        return None

    bound = geo.index.count
    for mark_line, mark_depth in geo.labeled_marks:
        if mark_line > after and mark_depth <= depth:
            bound = min(bound, mark_line - 1)
            break
    block = innermost_block(geo.blocks, record.range.start)
    if block is not None:
        bound = min(bound, block.close_line - 1)

    if start > bound:
        return None
    end = bound
    while end >= start and geo.blank[end]:
        end -= 1
    if end < start:
        return None
    return start, end


def _lines_to_range(geo: FileGeometry, start_line: int, end_line: int) -> SourceRange:
    start = geo.index.span(start_line)[0]
    end = geo.index.span(end_line)[1]
    return SourceRange(
        start=start, end=end, start_line=start_line, end_line=end_line
    )


def infer_code_region(
    node: CommentNode,
    records: list[CommentRecord],
    source: bytes | str,
    profile: Optional[SyntaxProfile] = None,
    geometry: Optional[FileGeometry] = None,
) -> Optional[SourceRange]:
    """The code region a node describes, or None for sketch-only nodes."""
    profile = profile or SyntaxProfile()
    data = source.encode("utf-8") if isinstance(source, str) else source
    geo = geometry or FileGeometry.build(data, records, profile)

    by_range = {r.range: r for r in records}
    contributions: list[tuple[int, int]] = []
    for anchor in node.anchors:
        record = by_range.get(anchor.range)
        if record is None:
            continue
        lines = _anchor_region_lines(record, geo)
        if lines is not None:
            contributions.append(lines)
    if not contributions:
        return None
    start_line, end_line = contributions[-1]
    return _lines_to_range(geo, start_line, end_line)


@dataclass
class FileLinks:
    links: list[CodeLink] = field(default_factory=list)
    regions: dict[str, SourceRange] = field(default_factory=dict)
    diagnostics: list[Diagnostic] = field(default_factory=list)


def link_file(
    build: TreeBuild,
    data: bytes,
    records: list[CommentRecord],
    profile: SyntaxProfile,
    file: str,
    geometry: Optional[FileGeometry] = None,
) -> FileLinks:
    """Produce code links for every node of one file."""
    geo = geometry or FileGeometry.build(data, records, profile)
    out = FileLinks()
    if not geo.balanced:
        out.diagnostics.append(
            Diagnostic(
                kind="GrammarViolation",
                file=file,
                message="unbalanced braces; scope boundaries fall back to end of file",
                severity="warning",
            )
        )
    for node_id in sorted(
        build.nodes, key=lambda nid: build.nodes[nid].first_anchor.range.start
    ):
        node = build.nodes[node_id]
        region = infer_code_region(
            node, list(build.anchor_records[node_id]), data, profile, geometry=geo
        )
        if region is None:
            continue
        out.regions[node_id] = region
        out.links.append(
            CodeLink(
                node_id=node_id,
                code_range=region,
                code_fingerprint=fingerprint(data[region.start : region.end], profile),
            )
        )
    return out


def link_all(
    tree_per_file: dict[str, TreeBuild],
    sources: dict[str, bytes],
    profile: Optional[SyntaxProfile] = None,
    records_per_file: Optional[dict[str, list[CommentRecord]]] = None,
) -> tuple[list[CodeLink], list[Diagnostic]]:
    """Link every file's tree against its source text."""
    profile = profile or SyntaxProfile()
    links: list[CodeLink] = []
    diagnostics: list[Diagnostic] = []
    for path in sorted(tree_per_file):
        build = tree_per_file[path]
        if path not in sources:
            for node_id in sorted(build.nodes):
                node = build.nodes[node_id]
                diagnostics.append(
                    Diagnostic(
                        kind="BrokenLink",
                        file=path,
                        message=f"source for {node.label.raw} is missing",
                        severity="error",
                        node_id=node_id,
                        comment_range=node.first_anchor.range,
                    )
                )
            continue
        records = (
            records_per_file[path]
            if records_per_file is not None
            else list(build.unlabeled)
            + [r for recs in build.anchor_records.values() for r in recs]
        )
        result = link_file(build, sources[path], records, profile, path)
        links.extend(result.links)
        diagnostics.extend(result.diagnostics)
    return links, diagnostics
