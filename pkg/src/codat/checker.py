"""Consistency checking of comments against their linked code.

A check sends one prompt per node: a fixed question, the contiguous
comment block around the node's first anchor, and the linked code
region, all verbatim.  Three backends answer prompts: http posts to a
completion endpoint, replay looks up a stored response by prompt hash,
and constant always gives the same canned answer.  Verdict parsing is
shared, so backends are interchangeable.
"""

from __future__ import annotations

import os
import re
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Optional

from .config import BackendConfig
from .engine import FileScan, ProjectScan
from .errors import (
    CheckTimeout,
    EmptyRegion,
    MissingApiKey,
    MissingFixture,
    TransportFailure,
    UnknownNode,
)
from .hashes import collapse_ws, short_hash
from .model import CommentNode, Diagnostic, Verdict

PROMPT_QUESTION = "Does the comment at the top match the following code"

# Base delay for HTTP retry backoff; tests shrink it.
RETRY_BASE_DELAY_S = 0.5

CANNED_RESPONSES = {
    "consistent": "The provided code matches the comment at the top.",
    "inconsistent": "No, the code does not match the comment at the top.",
    "unknown": "The relationship between the comment and the code is unclear.",
}


def prompt_hash(prompt: str) -> str:
    return short_hash(prompt)


def comment_block_text(fs: FileScan, node: CommentNode) -> str:
    """The contiguous run of comment-only lines around the first anchor.

    For a trailing comment that shares its line with code, just the
    comment record's own text span is used.
    """
    geo = fs.geometry
    index = geo.index
    anchor = node.first_anchor
    line = anchor.range.start_line

    def comment_only(n: int) -> bool:
        return 1 <= n <= index.count and not geo.has_code[n] and not geo.blank[n]

    if not comment_only(line):
        return fs.data[anchor.range.start : anchor.range.end].decode("utf-8", "replace")
    top = line
    while comment_only(top - 1):
        top -= 1
    bottom = anchor.range.end_line
    while comment_only(bottom + 1):
        bottom += 1
    start = index.span(top)[0]
    end = index.span(bottom)[1]
    return fs.data[start:end].decode("utf-8", "replace")


def build_prompt(comment: str, code: str) -> str:
    """Compose the check prompt; the code part must be non-empty."""
    if not code.strip():
        raise EmptyRegion("node has no linked code region to check")
    return f"{PROMPT_QUESTION}\n\n{comment}\n{code}\n"


def prompt_for_node(fs: FileScan, node: CommentNode) -> str:
    region = fs.regions.get(node.id)
    if region is None:
        raise EmptyRegion(f"node {node.label.raw} is sketch-only; nothing to check")
    comment = comment_block_text(fs, node)
    code = fs.data[region.start : region.end].decode("utf-8", "replace")
    return build_prompt(comment, code)


def _check_http(prompt: str, backend: BackendConfig) -> str:
    import requests

    key = os.environ.get(backend.api_key_env, "")
    if not key:
        raise MissingApiKey(
            f"environment variable {backend.api_key_env} is not set"
        )
    headers = {"Authorization": f"Bearer {key}"}
    payload = {"input": prompt}
    last: Optional[Exception] = None
    for attempt in range(backend.max_retries + 1):
        if attempt:
            time.sleep(RETRY_BASE_DELAY_S * (2 ** (attempt - 1)))
        try:
            resp = requests.post(
                backend.endpoint_url,
                json=payload,
                headers=headers,
                timeout=backend.timeout_s,
            )
        except requests.Timeout:
            last = CheckTimeout(f"no answer within {backend.timeout_s}s")
            continue
        except requests.RequestException as exc:
            last = TransportFailure(f"cannot reach {backend.endpoint_url}: {exc}")
            continue
        if resp.status_code >= 500:
            last = TransportFailure(f"server error {resp.status_code}")
            continue
        if resp.status_code != 200:
            raise TransportFailure(f"unexpected status {resp.status_code}")
        try:
            body = resp.json()
        except ValueError as exc:
            raise TransportFailure(f"response is not JSON: {exc}") from exc
        if "output" not in body:
            raise TransportFailure("response JSON lacks an output field")
        return str(body["output"])
    assert last is not None
    raise last


def _check_replay(prompt: str, backend: BackendConfig) -> str:
    if not backend.fixture_dir:
        raise MissingFixture("replay backend has no fixture directory configured")
    name = prompt_hash(prompt) + ".txt"
    path = Path(backend.fixture_dir) / name
    if not path.is_file():
        raise MissingFixture(f"no stored response {name} in {backend.fixture_dir}")
    return path.read_text(encoding="utf-8")


def check(prompt: str, backend: BackendConfig) -> str:
    """Send a prompt to a backend and return the raw response text."""
    if backend.kind == "http":
        return _check_http(prompt, backend)
    if backend.kind == "replay":
        return _check_replay(prompt, backend)
    return CANNED_RESPONSES[backend.fixed_outcome]


_SENTENCE_END = re.compile(r"(?<=[.!?])\s+")
_AFFIRMATIONS = (
    re.compile(r"^yes\b"),
    re.compile(r"\bmatches\b"),
    re.compile(r"\bcorrectly implements\b"),
)
_NEGATIONS = (
    re.compile(r"^no\b"),
    re.compile(r"\bdoes not match\b"),
    re.compile(r"\bmistake in the implementation\b"),
)


def parse_verdict(response: str) -> Verdict:
    """Classify a free-text response by its first three sentences.

    An affirmation counts only when no negation occurs before it in the
    window.  Effective affirmation alone means consistent, negation
    alone means inconsistent, and both or neither mean unknown.  The
    full response text is kept as the explanation.
    """
    window = " ".join(_SENTENCE_END.split(collapse_ws(response))[:3]).lower()

    neg_positions = []
    for pattern in _NEGATIONS:
        m = pattern.search(window)
        if m:
            neg_positions.append(m.start())
    first_neg = min(neg_positions) if neg_positions else None

    affirm = False
    for pattern in _AFFIRMATIONS:
        m = pattern.search(window)
        if m and (first_neg is None or m.start() < first_neg):
            affirm = True
            break

    if affirm and first_neg is None:
        outcome = "consistent"
    elif first_neg is not None and not affirm:
        outcome = "inconsistent"
    else:
        outcome = "unknown"
    return Verdict(outcome=outcome, explanation=response, backend_id="")


class VerdictCache:
    """Per-run memo of verdicts keyed by (node id, code fingerprint)."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._store: dict[tuple[str, str], Verdict] = {}

    def get(self, key: tuple[str, str]) -> Optional[Verdict]:
        with self._lock:
            return self._store.get(key)

    def put(self, key: tuple[str, str], verdict: Verdict) -> None:
        with self._lock:
            self._store[key] = verdict


def check_node(
    node_id: str,
    scan: ProjectScan,
    backend: BackendConfig,
    cache: Optional[VerdictCache] = None,
) -> tuple[Verdict, Optional[Diagnostic]]:
    """Check one linked node; returns the verdict and, when the verdict
    is inconsistent, a matching diagnostic."""
    nodes = scan.nodes()
    if node_id not in nodes:
        raise UnknownNode(f"no node with id {node_id}")
    path, node = nodes[node_id]
    fs = scan.files[path]
    link = scan.links().get(node_id)
    if link is None:
        raise EmptyRegion(f"node {node.label.raw} is sketch-only; nothing to check")

    key = (node_id, link.code_fingerprint)
    verdict = cache.get(key) if cache else None
    if verdict is None:
        prompt = prompt_for_node(fs, node)
        response = check(prompt, backend)
        verdict = parse_verdict(response).with_backend(backend.backend_id)
        if cache:
            cache.put(key, verdict)

    diagnostic = None
    if verdict.outcome == "inconsistent":
        diagnostic = Diagnostic(
            kind="Inconsistent",
            file=path,
            message=verdict.explanation,
            severity="error",
            node_id=node_id,
            comment_range=node.first_anchor.range,
            code_range=link.code_range,
        )
    return verdict, diagnostic


def check_many(
    node_ids: list[str],
    scan: ProjectScan,
    backend: BackendConfig,
    cache: Optional[VerdictCache] = None,
    parallelism: int = 2,
) -> list[tuple[str, Verdict, Optional[Diagnostic]]]:
    """Check several nodes with a small worker pool; order preserved."""
    cache = cache or VerdictCache()
    results: dict[str, tuple[Verdict, Optional[Diagnostic]]] = {}
    errors: dict[str, Exception] = {}

    def work(nid: str) -> None:
        try:
            results[nid] = check_node(nid, scan, backend, cache)
        except Exception as exc:  # surfaced per node by the caller
            errors[nid] = exc

    with ThreadPoolExecutor(max_workers=max(1, parallelism)) as pool:
        list(pool.map(work, node_ids))

    out: list[tuple[str, Verdict, Optional[Diagnostic]]] = []
    for nid in node_ids:
        if nid in errors:
            raise errors[nid]
        verdict, diag = results[nid]
        out.append((nid, verdict, diag))
    return out
