"""Hash helpers.

Identity hashes (node ids, text hashes, file hashes, prompt names) are
sha256 truncated to 16 hex characters.  Code fingerprints keep the full
64 hex digest because they guard change detection rather than identity.
"""

from __future__ import annotations

import hashlib

SHORT_LEN = 16


def _digest(data: bytes | str) -> "hashlib._Hash":
    if isinstance(data, str):
        data = data.encode("utf-8")
    return hashlib.sha256(data)


def short_hash(data: bytes | str) -> str:
    """16-hex-char truncated sha256, used for identities."""
    return _digest(data).hexdigest()[:SHORT_LEN]


def full_hash(data: bytes | str) -> str:
    """Full 64-hex-char sha256, used for code fingerprints."""
    return _digest(data).hexdigest()


def collapse_ws(text: str) -> str:
    """Collapse every whitespace run to one space and trim the ends."""
    return " ".join(text.split())
