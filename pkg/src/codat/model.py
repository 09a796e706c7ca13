"""Domain model for labeled comments, anchors, links, and findings.

Every type is an immutable dataclass with a to_dict/from_dict pair.
Serialized field names are camelCase; ranges serialize both byte
offsets and 1-based line numbers so consumers never recompute them.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Any, Optional

from .errors import ValidationError
from .hashes import collapse_ws, short_hash

COMMENT_KINDS = frozenset({"line", "block"})
ANCHOR_STATUSES = frozenset({"valid", "relocated", "orphaned"})
DIAGNOSTIC_KINDS = frozenset(
    {
        "StaleComment",
        "OrphanedComment",
        "BrokenLink",
        "Inconsistent",
        "GrammarViolation",
    }
)
SEVERITIES = frozenset({"warning", "error"})
VERDICT_OUTCOMES = frozenset({"consistent", "inconsistent", "unknown"})

# Clause keywords that are canonical rather than custom tags.
CANONICAL_KEYWORDS = frozenset(
    {"OVERVIEW", "REQUIRES", "MODIFIES", "EFFECTS", "HELPS", "SKETCH"}
)


@dataclass(frozen=True)
class Label:
    """A structured comment label such as CS1 or AS2.1.

    prefix is one of the configured label prefixes, path is the dotted
    numeric path as a tuple of ints, and raw is the tag exactly as it
    appeared in the source (prefix plus dotted digits, no colon).
    """

    prefix: str
    path: tuple[int, ...]
    raw: str

    def __post_init__(self) -> None:
        if not self.prefix or not self.prefix.isalpha():
            raise ValidationError(f"bad label prefix: {self.prefix!r}")
        if not self.path:
            raise ValidationError("label path must be non-empty")
        if any(p < 0 for p in self.path):
            raise ValidationError(f"negative label path element: {self.path}")

    @property
    def depth(self) -> int:
        return len(self.path)

    @property
    def dotted(self) -> str:
        return ".".join(str(p) for p in self.path)

    def sort_key(self) -> tuple:
        return (self.prefix, self.path)

    def extends(self, other: "Label") -> bool:
        """True when self sits strictly below other in the hierarchy."""
        return (
            self.prefix == other.prefix
            and len(self.path) > len(other.path)
            and self.path[: len(other.path)] == other.path
        )

    def to_dict(self) -> dict[str, Any]:
        return {"prefix": self.prefix, "path": list(self.path), "raw": self.raw}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "Label":
        return cls(prefix=d["prefix"], path=tuple(d["path"]), raw=d["raw"])


@dataclass(frozen=True)
class SourceRange:
    """Half-open byte span [start, end) plus 1-based line numbers."""

    start: int
    end: int
    start_line: int
    end_line: int

    def __post_init__(self) -> None:
        if self.start < 0 or self.end <= self.start:
            raise ValidationError(f"bad range offsets: {self.start}..{self.end}")
        if self.start_line < 1 or self.end_line < self.start_line:
            raise ValidationError(
                f"bad range lines: {self.start_line}..{self.end_line}"
            )

    def contains_line(self, line: int) -> bool:
        return self.start_line <= line <= self.end_line

    def overlaps(self, other: "SourceRange") -> bool:
        return self.start < other.end and other.start < self.end

    def to_dict(self) -> dict[str, Any]:
        return {
            "start": self.start,
            "end": self.end,
            "startLine": self.start_line,
            "endLine": self.end_line,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "SourceRange":
        return cls(
            start=d["start"],
            end=d["end"],
            start_line=d["startLine"],
            end_line=d["endLine"],
        )


@dataclass(frozen=True)
class Clause:
    """One keyword-tagged span of comment text.

    keyword is a canonical clause name (OVERVIEW, REQUIRES, MODIFIES,
    EFFECTS, HELPS, SKETCH) or a custom tag kept in its original case.
    text is non-empty after trimming; keyword-only lines produce no
    clause at all.
    """

    keyword: str
    text: str

    def __post_init__(self) -> None:
        if not self.keyword:
            raise ValidationError("clause keyword must be non-empty")
        if not self.text.strip():
            raise ValidationError("clause text must be non-empty after trimming")

    @property
    def is_custom(self) -> bool:
        return self.keyword not in CANONICAL_KEYWORDS

    def to_dict(self) -> dict[str, Any]:
        return {"keyword": self.keyword, "text": self.text}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "Clause":
        return cls(keyword=d["keyword"], text=d["text"])


@dataclass(frozen=True)
class CommentRecord:
    """One comment as found in a file, after coalescing.

    body holds the text with comment delimiters stripped; for coalesced
    line comments the per-line texts are joined with newlines.  range
    still covers the full original span including delimiters.
    """

    file: str
    kind: str
    range: SourceRange
    body: str
    label: Optional[Label] = None
    clauses: tuple[Clause, ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in COMMENT_KINDS:
            raise ValidationError(f"bad comment kind: {self.kind!r}")

    @property
    def text_hash(self) -> str:
        return short_hash(collapse_ws(self.body))

    def to_dict(self) -> dict[str, Any]:
        return {
            "file": self.file,
            "kind": self.kind,
            "range": self.range.to_dict(),
            "body": self.body,
            "label": self.label.to_dict() if self.label else None,
            "clauses": [c.to_dict() for c in self.clauses],
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "CommentRecord":
        return cls(
            file=d["file"],
            kind=d["kind"],
            range=SourceRange.from_dict(d["range"]),
            body=d["body"],
            label=Label.from_dict(d["label"]) if d.get("label") else None,
            clauses=tuple(Clause.from_dict(c) for c in d.get("clauses", [])),
        )


@dataclass(frozen=True)
class Anchor:
    """Where a labeled comment lives in a file, with relocation hashes.

    textHash fingerprints the comment body (whitespace collapsed) and
    contextHash fingerprints the surrounding non-comment lines; both
    are used to find the comment again after unrelated edits.
    """

    file: str
    range: SourceRange
    text_hash: str
    context_hash: str
    status: str = "valid"

    def __post_init__(self) -> None:
        if self.status not in ANCHOR_STATUSES:
            raise ValidationError(f"bad anchor status: {self.status!r}")

    def to_dict(self) -> dict[str, Any]:
        return {
            "file": self.file,
            "range": self.range.to_dict(),
            "textHash": self.text_hash,
            "contextHash": self.context_hash,
            "status": self.status,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "Anchor":
        return cls(
            file=d["file"],
            range=SourceRange.from_dict(d["range"]),
            text_hash=d["textHash"],
            context_hash=d["contextHash"],
            status=d["status"],
        )


def node_id_for(file: str, prefix: str, dotted: str, ordinal: int) -> str:
    """Stable node identity within a project.

    Derived from the file path, label prefix, dotted path, and the
    ordinal among same-labeled nodes in the file, so ids survive
    rescans but distinguish repeated labels in different scopes.
    """
    key = "\x00".join([file, prefix, dotted, str(ordinal)])
    return short_hash(key)


@dataclass(frozen=True)
class CommentNode:
    """A labeled node in the comment hierarchy.

    A node may have several anchors when the same label appears both in
    a sketch block and as an inline twin within one scope.  children
    holds ids, sorted by label path; parent_id is None for roots.
    """

    id: str
    label: Label
    anchors: tuple[Anchor, ...]
    children: tuple[str, ...] = ()
    parent_id: Optional[str] = None

    def __post_init__(self) -> None:
        if not self.anchors:
            raise ValidationError(f"node {self.id} must have at least one anchor")

    @property
    def file(self) -> str:
        return self.anchors[0].file

    @property
    def first_anchor(self) -> Anchor:
        return self.anchors[0]

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "label": self.label.to_dict(),
            "anchors": [a.to_dict() for a in self.anchors],
            "children": list(self.children),
            "parentId": self.parent_id,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "CommentNode":
        return cls(
            id=d["id"],
            label=Label.from_dict(d["label"]),
            anchors=tuple(Anchor.from_dict(a) for a in d["anchors"]),
            children=tuple(d.get("children", [])),
            parent_id=d.get("parentId"),
        )


@dataclass(frozen=True)
class CommentTree:
    """Per-file forests of labeled nodes plus the unlabeled leftovers."""

    per_file: dict[str, tuple[CommentNode, ...]]
    unlabeled: tuple[CommentRecord, ...] = ()

    def to_dict(self) -> dict[str, Any]:
        return {
            "perFile": {
                path: [n.to_dict() for n in roots]
                for path, roots in sorted(self.per_file.items())
            },
            "unlabeled": [r.to_dict() for r in self.unlabeled],
        }


@dataclass(frozen=True)
class CodeLink:
    """Binding from a node to the code region it describes."""

    node_id: str
    code_range: SourceRange
    code_fingerprint: str

    def to_dict(self) -> dict[str, Any]:
        return {
            "nodeId": self.node_id,
            "codeRange": self.code_range.to_dict(),
            "codeFingerprint": self.code_fingerprint,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "CodeLink":
        return cls(
            node_id=d["nodeId"],
            code_range=SourceRange.from_dict(d["codeRange"]),
            code_fingerprint=d["codeFingerprint"],
        )


@dataclass(frozen=True)
class FileEntry:
    """Snapshot state for a single file."""

    file_hash: str
    records: tuple[CommentRecord, ...]
    links: tuple[CodeLink, ...]

    def to_dict(self) -> dict[str, Any]:
        return {
            "fileHash": self.file_hash,
            "records": [r.to_dict() for r in self.records],
            "links": [l.to_dict() for l in self.links],
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "FileEntry":
        return cls(
            file_hash=d["fileHash"],
            records=tuple(CommentRecord.from_dict(r) for r in d["records"]),
            links=tuple(CodeLink.from_dict(l) for l in d["links"]),
        )


SNAPSHOT_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class Snapshot:
    """Persisted baseline of a project's comments and links.

    acknowledged holds (nodeId, codeFingerprint) pairs the user has
    accepted; a staleness finding is suppressed while the current
    fingerprint matches an acknowledged pair.
    """

    project_root: str
    created_at: str
    files: dict[str, FileEntry]
    acknowledged: frozenset[tuple[str, str]] = frozenset()
    schema_version: int = SNAPSHOT_SCHEMA_VERSION

    def links_by_node(self) -> dict[str, tuple[str, CodeLink]]:
        """Map nodeId to (file, link) across all files."""
        out: dict[str, tuple[str, CodeLink]] = {}
        for path, entry in self.files.items():
            for link in entry.links:
                out[link.node_id] = (path, link)
        return out

    def to_dict(self) -> dict[str, Any]:
        return {
            "schemaVersion": self.schema_version,
            "projectRoot": self.project_root,
            "createdAt": self.created_at,
            "files": {
                path: entry.to_dict() for path, entry in sorted(self.files.items())
            },
            "acknowledged": [list(pair) for pair in sorted(self.acknowledged)],
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "Snapshot":
        version = d.get("schemaVersion")
        if version != SNAPSHOT_SCHEMA_VERSION:
            raise ValidationError(f"unsupported snapshot schemaVersion: {version!r}")
        return cls(
            project_root=d["projectRoot"],
            created_at=d["createdAt"],
            files={
                path: FileEntry.from_dict(entry)
                for path, entry in d["files"].items()
            },
            acknowledged=frozenset(
                (pair[0], pair[1]) for pair in d.get("acknowledged", [])
            ),
            schema_version=version,
        )


@dataclass(frozen=True)
class Diagnostic:
    """One finding reported by diff, watch, or the checker.

    StaleComment and Inconsistent findings always carry both a comment
    range and a code range; the other kinds carry whichever side still
    exists.
    """

    kind: str
    file: str
    message: str
    severity: str
    node_id: Optional[str] = None
    comment_range: Optional[SourceRange] = None
    code_range: Optional[SourceRange] = None

    def __post_init__(self) -> None:
        if self.kind not in DIAGNOSTIC_KINDS:
            raise ValidationError(f"bad diagnostic kind: {self.kind!r}")
        if self.severity not in SEVERITIES:
            raise ValidationError(f"bad severity: {self.severity!r}")
        if self.kind in ("StaleComment", "Inconsistent"):
            if self.comment_range is None or self.code_range is None:
                raise ValidationError(f"{self.kind} needs both ranges")

    def sort_key(self) -> tuple:
        anchor = self.comment_range or self.code_range
        return (self.file, anchor.start if anchor else 0, self.kind, self.message)

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "nodeId": self.node_id,
            "file": self.file,
            "commentRange": self.comment_range.to_dict()
            if self.comment_range
            else None,
            "codeRange": self.code_range.to_dict() if self.code_range else None,
            "message": self.message,
            "severity": self.severity,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "Diagnostic":
        return cls(
            kind=d["kind"],
            file=d["file"],
            message=d["message"],
            severity=d["severity"],
            node_id=d.get("nodeId"),
            comment_range=SourceRange.from_dict(d["commentRange"])
            if d.get("commentRange")
            else None,
            code_range=SourceRange.from_dict(d["codeRange"])
            if d.get("codeRange")
            else None,
        )


@dataclass(frozen=True)
class Verdict:
    """Outcome of one consistency check."""

    outcome: str
    explanation: str
    backend_id: str

    def __post_init__(self) -> None:
        if self.outcome not in VERDICT_OUTCOMES:
            raise ValidationError(f"bad verdict outcome: {self.outcome!r}")

    def with_backend(self, backend_id: str) -> "Verdict":
        return replace(self, backend_id=backend_id)

    def to_dict(self) -> dict[str, Any]:
        return {
            "outcome": self.outcome,
            "explanation": self.explanation,
            "backendId": self.backend_id,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "Verdict":
        return cls(
            outcome=d["outcome"],
            explanation=d["explanation"],
            backend_id=d["backendId"],
        )
