"""Bundled example project: a small Java search engine.

The six source files exercise every comment form the parser handles:
hierarchical sketch labels with inline twins, assertion labels,
specification clauses, plain prose comments, and trailing comments.
They are byte-frozen; goldens under golden/ record the expected parse.
"""

from __future__ import annotations

import os
import shutil
import tempfile
from pathlib import Path

_HERE = Path(__file__).resolve().parent

FILES_DIR = _HERE / "files"
GOLDEN_DIR = _HERE / "golden"
FIXTURES_DIR = _HERE / "fixtures" / "llm"
PATCHES_DIR = _HERE / "patches"

CORPUS_FILES = (
    "Doc.java",
    "DocCnt.java",
    "Engine.java",
    "Query.java",
    "TitleTable.java",
    "WordTable.java",
)


def load_corpus(dest: Path | str | None = None) -> Path:
    """Materialize the example project into dest (or a fresh temp dir)."""
    root = Path(dest) if dest is not None else Path(tempfile.mkdtemp(prefix="codat-corpus-"))
    root.mkdir(parents=True, exist_ok=True)
    for name in CORPUS_FILES:
        shutil.copyfile(FILES_DIR / name, root / name)
    return root


def _apply_unified_patch(text: str, patch: str) -> str:
    """Apply a unified diff to text; exact context match required."""
    lines = text.splitlines(keepends=True)
    out: list[str] = []
    cursor = 0
    for hunk in _parse_hunks(patch):
        start = hunk["old_start"] - 1
        out.extend(lines[cursor:start])
        cursor = start
        for tag, content in hunk["ops"]:
            if tag == " ":
                if cursor >= len(lines) or lines[cursor].rstrip("\n") != content:
                    raise ValueError(f"context mismatch at line {cursor + 1}")
                out.append(lines[cursor])
                cursor += 1
            elif tag == "-":
                if cursor >= len(lines) or lines[cursor].rstrip("\n") != content:
                    raise ValueError(f"removal mismatch at line {cursor + 1}")
                cursor += 1
            else:
                out.append(content + "\n")
    out.extend(lines[cursor:])
    return "".join(out)


def _parse_hunks(patch: str) -> list[dict]:
    hunks: list[dict] = []
    current: dict | None = None
    for line in patch.splitlines():
        if line.startswith(("---", "+++")):
            continue
        if line.startswith("@@"):
            header = line.split("@@")[1].strip()
            old = header.split(" ")[0]
            old_start = int(old.lstrip("-").split(",")[0])
            current = {"old_start": old_start, "ops": []}
            hunks.append(current)
        elif current is not None and line[:1] in (" ", "-", "+"):
            current["ops"].append((line[:1], line[1:]))
    return hunks


def apply_bug_patch(root: Path | str) -> Path:
    """Introduce the known single-line bug into Query.java under root.

    The replacement is atomic so a concurrent watcher never reads a
    half-written file.
    """
    target = Path(root) / "Query.java"
    patch = (PATCHES_DIR / "adddoc_bug.patch").read_text(encoding="utf-8")
    patched = _apply_unified_patch(target.read_text(encoding="utf-8"), patch)
    tmp = target.with_name(target.name + ".tmp")
    tmp.write_text(patched, encoding="utf-8")
    os.replace(tmp, target)
    return target
