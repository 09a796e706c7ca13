"""Command line interface.

Exit codes: 0 clean, 1 operational error, 2 grammar violations under
--strict, 3 drift found by diff, 4 inconsistency found by check.  When
several apply the most specific wins: 1 beats everything, then 4, 3, 2.
"""

from __future__ import annotations

import argparse
import json
import re
import signal
import sys
from pathlib import Path
from typing import Optional

from . import __version__
from .checker import VerdictCache, check_many
from .config import CodatConfig, backend_from_spec, load_config
from .engine import ProjectScan, scan_project
from .errors import AmbiguousSelector, CodatError, UnknownNode
from .model import Diagnostic
from .tracker import (
    Watcher,
    acknowledge,
    diff,
    load_snapshot,
    take_snapshot,
    write_snapshot,
)

EXIT_CLEAN = 0
EXIT_ERROR = 1
EXIT_GRAMMAR = 2
EXIT_DRIFT = 3
EXIT_INCONSISTENT = 4

_SELECTOR_RE = re.compile(r"^([A-Za-z]+\d+(?:\.\d+)*)@([^:]+)(?::(.+))?$")


def resolve_selector(scan: ProjectScan, selector: str) -> str:
    """Resolve LABEL@file[:scopeHint] to a node id.

    The file part matches a relative path, a path suffix, or a bare
    file name; the optional hint is a substring of the scope header.
    """
    m = _SELECTOR_RE.match(selector)
    if not m:
        raise UnknownNode(
            f"bad selector {selector!r}; expected LABEL@file[:scopeHint]"
        )
    label_raw, file_part, hint = m.group(1), m.group(2), m.group(3)
    candidates: list[tuple[int, str, str]] = []
    for node_id, (path, node) in scan.nodes().items():
        if node.label.raw != label_raw:
            continue
        if not (
            path == file_part
            or path.endswith("/" + file_part)
            or Path(path).name == file_part
        ):
            continue
        scope = scan.files[path].build.scope_by_node.get(node_id, "")
        if hint and hint not in scope:
            continue
        candidates.append((node.first_anchor.range.start, node_id, f"{label_raw}@{path}:{scope}"))
    candidates.sort()
    if not candidates:
        raise UnknownNode(f"selector {selector!r} matched no nodes")
    if len(candidates) > 1:
        raise AmbiguousSelector(selector, [c[2] for c in candidates])
    return candidates[0][1]


def _print_diagnostic(d: Diagnostic) -> None:
    where = d.file
    anchor = d.comment_range or d.code_range
    if anchor:
        where += f":{anchor.start_line}"
    first_line = d.message.split("\n", 1)[0]
    print(f"{where} {d.severity} {d.kind}: {first_line}")


def _counts(diags: list[Diagnostic]) -> dict[str, int]:
    out: dict[str, int] = {}
    for d in diags:
        out[d.kind] = out.get(d.kind, 0) + 1
    return out


def _load(args: argparse.Namespace) -> tuple[Path, CodatConfig]:
    root = Path(args.root).resolve()
    config = load_config(root, Path(args.config) if args.config else None)
    return root, config


def cmd_scan(args: argparse.Namespace) -> int:
    root, config = _load(args)
    scan = scan_project(root, config, require_files=True)
    snapshot = take_snapshot(root, config, scan=scan)
    diags = scan.diagnostics()

    if args.json:
        report = {
            "root": str(root),
            "files": [
                {
                    "file": path,
                    "nodes": len(fs.build.nodes),
                    "linked": len(fs.links),
                    "sketchOnly": len(fs.build.nodes) - len(fs.links),
                    "unlabeled": len(fs.build.unlabeled),
                }
                for path, fs in sorted(scan.files.items())
            ],
            "totals": {
                "files": len(scan.files),
                "nodes": sum(len(fs.build.nodes) for fs in scan.files.values()),
                "linked": sum(len(fs.links) for fs in scan.files.values()),
            },
            "diagnostics": [d.to_dict() for d in diags],
            "snapshot": str(root / ".codat" / "snapshot.json"),
        }
        print(json.dumps(report, indent=2, sort_keys=True))
    else:
        for path, fs in sorted(scan.files.items()):
            print(
                f"{path}: {len(fs.build.nodes)} nodes, {len(fs.links)} linked, "
                f"{len(fs.build.unlabeled)} unlabeled comments"
            )
        for d in diags:
            _print_diagnostic(d)
        total = sum(len(fs.build.nodes) for fs in scan.files.values())
        print(
            f"snapshot written for {len(scan.files)} files, {total} nodes "
            f"({len(snapshot.acknowledged)} acknowledgements kept)"
        )
    if args.strict and any(d.kind == "GrammarViolation" for d in diags):
        return EXIT_GRAMMAR
    return EXIT_CLEAN


def cmd_diff(args: argparse.Namespace) -> int:
    root, config = _load(args)
    snapshot = load_snapshot(root)
    scan = scan_project(root, config)

    if args.ack:
        node_id = resolve_selector(scan, args.ack)
        snapshot = acknowledge(node_id, snapshot, scan)
        write_snapshot(snapshot, root)
        print(f"acknowledged {args.ack} ({node_id})")

    diags = diff(snapshot, scan)
    grammar = [d for d in scan.diagnostics() if d.kind == "GrammarViolation"]

    if args.json:
        print(
            json.dumps(
                {
                    "root": str(root),
                    "diagnostics": [d.to_dict() for d in diags],
                    "grammar": [d.to_dict() for d in grammar],
                    "counts": _counts(diags),
                },
                indent=2,
                sort_keys=True,
            )
        )
    else:
        for d in diags:
            _print_diagnostic(d)
        if not diags:
            print("no drift against the snapshot")
        else:
            parts = ", ".join(f"{v} {k}" for k, v in sorted(_counts(diags).items()))
            print(f"{len(diags)} findings: {parts}")
    if diags:
        return EXIT_DRIFT
    if args.strict and grammar:
        return EXIT_GRAMMAR
    return EXIT_CLEAN


def cmd_check(args: argparse.Namespace) -> int:
    root, config = _load(args)
    scan = scan_project(root, config, require_files=True)
    backend = (
        backend_from_spec(args.backend, config) if args.backend else config.check.backend
    )

    if args.selectors:
        node_ids = [resolve_selector(scan, sel) for sel in args.selectors]
    else:
        node_ids = [
            link.node_id
            for _, fs in sorted(scan.files.items())
            for link in fs.links
        ]
    results = check_many(
        node_ids, scan, backend, VerdictCache(), config.check.parallelism
    )

    nodes = scan.nodes()
    rows = []
    for node_id, verdict, _ in results:
        path, node = nodes[node_id]
        scope = scan.files[path].build.scope_by_node.get(node_id, "")
        rows.append(
            {
                "nodeId": node_id,
                "label": node.label.raw,
                "file": path,
                "scope": scope,
                "outcome": verdict.outcome,
                "backendId": verdict.backend_id,
                "explanation": verdict.explanation,
            }
        )

    if args.json:
        print(json.dumps({"root": str(root), "verdicts": rows}, indent=2, sort_keys=True))
    else:
        for row in rows:
            print(
                f"{row['label']}@{row['file']} [{row['scope']}]: "
                f"{row['outcome']} ({row['backendId']})"
            )
    if any(row["outcome"] == "inconsistent" for row in rows):
        return EXIT_INCONSISTENT
    return EXIT_CLEAN


def cmd_watch(args: argparse.Namespace) -> int:
    root, config = _load(args)

    def sink(batch: list[Diagnostic]) -> None:
        for d in batch:
            print(json.dumps(d.to_dict(), sort_keys=True), flush=True)

    watcher = Watcher(root, config, sink, emit_initial=args.emit_initial)
    signal.signal(signal.SIGINT, lambda *_: watcher.stop())
    signal.signal(signal.SIGTERM, lambda *_: watcher.stop())
    print(f"watching {root} (ctrl-c to stop)", file=sys.stderr, flush=True)
    watcher.run()
    return EXIT_CLEAN


def cmd_serve(args: argparse.Namespace) -> int:
    from .server import CodatServer

    root, config = _load(args)
    backend = backend_from_spec(args.backend, config) if args.backend else None
    ui_dir = Path(args.ui_dir) if args.ui_dir else _default_ui_dir()
    server = CodatServer(
        root, config, host=args.host, port=args.port, backend=backend, ui_dir=ui_dir
    )
    host, port = server.address
    print(f"listening on http://{host}:{port}", flush=True)
    if ui_dir is None:
        print("no UI bundle found; serving API only", file=sys.stderr, flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.shutdown()
    return EXIT_CLEAN


def _default_ui_dir() -> Optional[Path]:
    for candidate in (
        Path.cwd() / "frontend" / "dist",
        Path(__file__).resolve().parent.parent.parent / "frontend" / "dist",
    ):
        if candidate.is_dir():
            return candidate
    return None


def cmd_corpus(args: argparse.Namespace) -> int:
    from .corpus import apply_bug_patch, load_corpus

    dest = load_corpus(args.dest)
    if args.bug:
        apply_bug_patch(dest)
    print(dest)
    return EXIT_CLEAN


def build_arg_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="codat",
        description="Track labeled comments and the code they describe.",
    )
    parser.add_argument("--version", action="version", version=f"codat {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, root: bool = True) -> None:
        if root:
            p.add_argument("root", help="project root directory")
        p.add_argument("--config", help="path to a codat.toml (default: ROOT/codat.toml)")

    p = sub.add_parser("scan", help="parse, link, and store a snapshot")
    common(p)
    p.add_argument("--json", action="store_true", help="machine-readable report")
    p.add_argument("--strict", action="store_true", help="exit 2 on grammar violations")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("diff", help="compare the tree against the stored snapshot")
    common(p)
    p.add_argument("--json", action="store_true", help="machine-readable report")
    p.add_argument("--strict", action="store_true", help="exit 2 on grammar violations")
    p.add_argument("--ack", metavar="SELECTOR", help="acknowledge a stale node first")
    p.set_defaults(func=cmd_diff)

    p = sub.add_parser("check", help="ask a backend whether comments match code")
    common(p)
    p.add_argument(
        "selectors",
        nargs="*",
        help="nodes as LABEL@file[:scopeHint]; default is every linked node",
    )
    p.add_argument("--backend", help="backend spec: http[:URL], replay[:DIR], constant[:OUTCOME]")
    p.add_argument("--json", action="store_true", help="machine-readable report")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("watch", help="watch for edits and stream diagnostics as NDJSON")
    common(p)
    p.add_argument(
        "--emit-initial",
        action="store_true",
        help="emit the initial diagnostic set even when it is empty",
    )
    p.set_defaults(func=cmd_watch)

    p = sub.add_parser("serve", help="serve the HTTP API and web UI")
    common(p)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=0, help="0 picks a free port")
    p.add_argument("--backend", help="backend spec for /api/check")
    p.add_argument("--ui-dir", help="directory with the built frontend bundle")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("corpus", help="materialize the bundled example project")
    p.add_argument("dest", help="destination directory")
    p.add_argument("--bug", action="store_true", help="apply the known addDoc bug")
    p.add_argument("--config", help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_corpus)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_arg_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except AmbiguousSelector as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except CodatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except KeyboardInterrupt:
        return EXIT_CLEAN


if __name__ == "__main__":
    raise SystemExit(main())
