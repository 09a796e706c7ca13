"""Project scanning: one pass that yields records, trees, and links."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .config import CodatConfig
from .errors import NoMatchingFiles
from .hashes import short_hash
from .linker import FileGeometry, link_file
from .model import CodeLink, CommentNode, CommentRecord, CommentTree, Diagnostic, SourceRange
from .parser import TreeBuild, build_tree, extract_comments


@dataclass
class FileScan:
    """Everything derived from one source file in one scan."""

    path: str
    data: bytes
    file_hash: str
    records: list[CommentRecord]
    build: TreeBuild
    links: list[CodeLink]
    regions: dict[str, SourceRange]
    diagnostics: list[Diagnostic]
    geometry: FileGeometry


def scan_source(path: str, data: bytes, config: Optional[CodatConfig] = None) -> FileScan:
    """Scan one file's bytes into records, a tree, and code links."""
    config = config or CodatConfig()
    profile = config.syntax
    records, diagnostics = extract_comments(
        data, profile, config.patterns, file=path
    )
    geometry = FileGeometry.build(data, records, profile)
    build = build_tree(
        records,
        path,
        source=data,
        profile=profile,
        blocks=geometry.blocks,
        index=geometry.index,
    )
    linked = link_file(build, data, records, profile, path, geometry=geometry)
    return FileScan(
        path=path,
        data=data,
        file_hash=short_hash(data),
        records=records,
        build=build,
        links=linked.links,
        regions=linked.regions,
        diagnostics=diagnostics + build.diagnostics + linked.diagnostics,
        geometry=geometry,
    )


@dataclass
class ProjectScan:
    """All file scans for a project root."""

    root: Path
    config: CodatConfig
    files: dict[str, FileScan] = field(default_factory=dict)

    def tree(self) -> CommentTree:
        per_file = {
            path: fs.build.roots for path, fs in sorted(self.files.items())
        }
        unlabeled: list[CommentRecord] = []
        for _, fs in sorted(self.files.items()):
            unlabeled.extend(fs.build.unlabeled)
        return CommentTree(per_file=per_file, unlabeled=tuple(unlabeled))

    def nodes(self) -> dict[str, tuple[str, CommentNode]]:
        out: dict[str, tuple[str, CommentNode]] = {}
        for path, fs in self.files.items():
            for node_id, node in fs.build.nodes.items():
                out[node_id] = (path, node)
        return out

    def links(self) -> dict[str, CodeLink]:
        out: dict[str, CodeLink] = {}
        for fs in self.files.values():
            for link in fs.links:
                out[link.node_id] = link
        return out

    def diagnostics(self) -> list[Diagnostic]:
        out: list[Diagnostic] = []
        for fs in self.files.values():
            out.extend(fs.diagnostics)
        return sorted(out, key=lambda d: d.sort_key())


def project_files(root: Path, config: CodatConfig) -> list[str]:
    """Relative paths of matching source files, sorted; dot dirs skipped."""
    found: list[str] = []
    for dirpath, dirnames, filenames in os.walk(root):
        dirnames[:] = sorted(d for d in dirnames if not d.startswith("."))
        for name in sorted(filenames):
            if not config.syntax.matches(name):
                continue
            rel = os.path.relpath(os.path.join(dirpath, name), root)
            found.append(Path(rel).as_posix())
    return sorted(found)


def scan_project(
    root: Path | str,
    config: Optional[CodatConfig] = None,
    require_files: bool = False,
) -> ProjectScan:
    """Scan every matching file under a project root."""
    root = Path(root).resolve()
    config = config or CodatConfig()
    scan = ProjectScan(root=root, config=config)
    paths = project_files(root, config)
    if require_files and not paths:
        exts = ", ".join(config.syntax.extensions)
        raise NoMatchingFiles(f"no files matching {exts} under {root}")
    for rel in paths:
        try:
            data = (root / rel).read_bytes()
        except OSError:
            continue
        scan.files[rel] = scan_source(rel, data, config)
    return scan


def rescan_paths(scan: ProjectScan, changed: set[str]) -> ProjectScan:
    """Refresh a scan for a set of relative paths, in place."""
    for rel in changed:
        full = scan.root / rel
        if not full.is_file():
            scan.files.pop(rel, None)
            continue
        try:
            data = full.read_bytes()
        except OSError:
            continue
        existing = scan.files.get(rel)
        if existing is not None and existing.file_hash == short_hash(data):
            continue
        scan.files[rel] = scan_source(rel, data, scan.config)
    return scan
