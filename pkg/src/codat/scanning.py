"""Lexical scanning of source files.

The scanner walks raw bytes and splits a file into code, line-comment,
block-comment, and string segments.  Byte offsets rather than decoded
character positions keep ranges stable under any UTF-8 content; the
comment and string tokens themselves are ASCII.

Tolerances: an unterminated string ends at the next newline or EOF and
an unterminated block comment runs to EOF (and is reported).  Nested
block comments are not supported.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass

from .config import SyntaxProfile
from .hashes import collapse_ws

CODE = "code"
LINE = "line"
BLOCK = "block"
STRING = "string"

_WS_BYTES = frozenset(b" \t\r\f\v\n")
_BACKSLASH = 0x5C
_NEWLINE = 0x0A


@dataclass(frozen=True)
class Segment:
    kind: str
    start: int
    end: int


@dataclass(frozen=True)
class ScanProblem:
    offset: int
    message: str


def split_segments(data: bytes, profile: SyntaxProfile) -> tuple[list[Segment], list[ScanProblem]]:
    """Split raw bytes into code/comment/string segments, in order."""
    tokens: list[tuple[bytes, str]] = []
    if profile.line_comment:
        tokens.append((profile.line_comment.encode("ascii"), LINE))
    if profile.block_open:
        tokens.append((profile.block_open.encode("ascii"), BLOCK))
    for delim in profile.string_delimiters:
        tokens.append((delim.encode("ascii"), STRING))
    close = profile.block_close.encode("ascii") if profile.block_close else b""

    segments: list[Segment] = []
    problems: list[ScanProblem] = []
    n = len(data)
    i = 0
    while i < n:
        # Jump to the nearest token start; everything before it is code.
        best_pos = n
        best: tuple[bytes, str] | None = None
        for tok, kind in tokens:
            pos = data.find(tok, i)
            if pos == -1 or pos > best_pos:
                continue
            if pos < best_pos or (best is not None and len(tok) > len(best[0])):
                best_pos = pos
                best = (tok, kind)
        if best_pos > i:
            segments.append(Segment(CODE, i, best_pos))
            i = best_pos
        if best is None:
            break
        tok, kind = best
        if kind == LINE:
            nl = data.find(b"\n", i)
            end = n if nl == -1 else nl
            segments.append(Segment(LINE, i, end))
        elif kind == BLOCK:
            at = data.find(close, i + len(tok))
            if at == -1:
                problems.append(ScanProblem(i, "unterminated block comment"))
                end = n
            else:
                end = at + len(close)
            segments.append(Segment(BLOCK, i, end))
        else:
            j = i + len(tok)
            while j < n:
                b = data[j]
                if b == _BACKSLASH:
                    j = min(j + 2, n)
                    continue
                if data.startswith(tok, j):
                    j += len(tok)
                    break
                if b == _NEWLINE:
                    break
                j += 1
            end = j
            segments.append(Segment(STRING, i, end))
        i = end
    return segments, problems


class LineIndex:
    """Maps byte offsets to 1-based line numbers and back."""

    def __init__(self, data: bytes):
        self._starts = [0]
        pos = 0
        while True:
            nl = data.find(b"\n", pos)
            if nl == -1:
                break
            self._starts.append(nl + 1)
            pos = nl + 1
        self._size = len(data)
        self._data = data

    @property
    def count(self) -> int:
        return len(self._starts)

    def line_of(self, offset: int) -> int:
        return bisect_right(self._starts, offset)

    def span(self, line: int) -> tuple[int, int]:
        """Byte span of a line's content, excluding the newline."""
        start = self._starts[line - 1]
        if line < len(self._starts):
            return start, self._starts[line] - 1
        return start, self._size

    def text(self, line: int) -> bytes:
        s, e = self.span(line)
        return self._data[s:e]


def comment_mask(data: bytes, segments: list[Segment]) -> bytes:
    """Blank out comments (newlines kept) so code content stands alone."""
    out = bytearray(data)
    for seg in segments:
        if seg.kind in (LINE, BLOCK):
            for k in range(seg.start, seg.end):
                if out[k] != _NEWLINE:
                    out[k] = 0x20
    return bytes(out)


def code_mask(data: bytes, segments: list[Segment]) -> bytes:
    """Blank out comments and strings, for brace and header scanning."""
    out = bytearray(data)
    for seg in segments:
        if seg.kind in (LINE, BLOCK, STRING):
            for k in range(seg.start, seg.end):
                if out[k] != _NEWLINE:
                    out[k] = 0x20
    return bytes(out)


@dataclass(frozen=True)
class Block:
    """One balanced brace block, with its collapsed scope header."""

    open: int
    close: int
    open_line: int
    close_line: int
    header: str


def _header_for(masked: bytes, open_off: int) -> str:
    j = open_off - 1
    while j >= 0 and masked[j] not in b";{}":
        j -= 1
    raw = masked[j + 1 : open_off].decode("utf-8", "replace")
    return collapse_ws(raw)


def brace_blocks(
    data: bytes, segments: list[Segment], index: LineIndex
) -> tuple[list[Block], bool]:
    """All balanced brace blocks plus whether the file balanced overall."""
    masked = code_mask(data, segments)
    stack: list[int] = []
    blocks: list[Block] = []
    balanced = True
    for pos, byte in enumerate(masked):
        if byte == 0x7B:
            stack.append(pos)
        elif byte == 0x7D:
            if not stack:
                balanced = False
                continue
            open_off = stack.pop()
            blocks.append(
                Block(
                    open=open_off,
                    close=pos,
                    open_line=index.line_of(open_off),
                    close_line=index.line_of(pos),
                    header=_header_for(masked, open_off),
                )
            )
    if stack:
        balanced = False
    blocks.sort(key=lambda b: b.open)
    return blocks, balanced


def innermost_block(blocks: list[Block], offset: int) -> Block | None:
    """Smallest block whose span contains the offset, if any."""
    best: Block | None = None
    for blk in blocks:
        if blk.open <= offset <= blk.close:
            if best is None or (blk.close - blk.open) < (best.close - best.open):
                best = blk
    return best


def line_flags(
    data: bytes, segments: list[Segment], index: LineIndex
) -> tuple[list[bool], list[bool]]:
    """Per line (1-based): does it hold code, and is it entirely blank.

    String literals count as code; comment text does not.
    """
    masked = comment_mask(data, segments)
    has_code = [False] * (index.count + 1)
    blank = [False] * (index.count + 1)
    for line in range(1, index.count + 1):
        s, e = index.span(line)
        chunk = masked[s:e]
        has_code[line] = any(b not in _WS_BYTES for b in chunk)
        blank[line] = all(b in _WS_BYTES for b in data[s:e])
    return has_code, blank


def normalize_code(code: bytes | str, profile: SyntaxProfile) -> bytes:
    """Canonical byte stream for fingerprinting a code slice.

    Comments become a single space, whitespace runs outside strings
    collapse to a single space, string literals are kept verbatim
    including their delimiters, and the ends are trimmed.
    """
    data = code.encode("utf-8") if isinstance(code, str) else code
    segments, _ = split_segments(data, profile)
    out = bytearray()

    def feed(byte: int) -> None:
        if byte in _WS_BYTES:
            if out and out[-1] != 0x20:
                out.append(0x20)
        else:
            out.append(byte)

    for seg in segments:
        if seg.kind in (LINE, BLOCK):
            feed(0x20)
        elif seg.kind == STRING:
            out.extend(data[seg.start : seg.end])
        else:
            for k in range(seg.start, seg.end):
                feed(data[k])
    while out and out[-1] == 0x20:
        out.pop()
    return bytes(out)
