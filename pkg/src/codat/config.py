"""Project configuration.

Configuration lives in an optional codat.toml at the project root.  The
defaults cover Java-style sources with CS, AS, and SP labels, so most
projects need no config file at all.

Only a small, documented subset of TOML is understood: [section]
headers, quoted strings, integers, floats, booleans, and flat arrays of
quoted strings.  Anything else raises ConfigError.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Optional

from .errors import ConfigError

CONFIG_FILENAME = "codat.toml"

# Canonical clause keywords plus the sketch spellings that map to SKETCH.
DEFAULT_CLAUSE_KEYWORDS = (
    "OVERVIEW",
    "REQUIRES",
    "MODIFIES",
    "EFFECTS",
    "HELPS",
    "SKETCH",
)
SKETCH_SYNONYMS = ("IMPL SKETCH", "CODE SKETCH", "SKETCH", "IMPL")


@dataclass(frozen=True)
class SyntaxProfile:
    """Comment and string syntax for one family of source files."""

    line_comment: str = "//"
    block_open: str = "/*"
    block_close: str = "*/"
    string_delimiters: tuple[str, ...] = ('"', "'")
    extensions: tuple[str, ...] = (".java", ".kt")

    def __post_init__(self) -> None:
        if not self.line_comment and not self.block_open:
            raise ConfigError("profile needs a line or block comment token")
        if bool(self.block_open) != bool(self.block_close):
            raise ConfigError("block comment open and close must come together")
        for ext in self.extensions:
            if not ext.startswith("."):
                raise ConfigError(f"extension must start with a dot: {ext!r}")

    def matches(self, path: str) -> bool:
        return any(path.endswith(ext) for ext in self.extensions)


@dataclass(frozen=True)
class LabelPattern:
    prefix: str
    description: str = ""


@dataclass(frozen=True)
class PatternConfig:
    """Label prefixes, clause keywords, and custom tags to recognize."""

    label_patterns: tuple[LabelPattern, ...] = (
        LabelPattern("CS", "code sketch step"),
        LabelPattern("AS", "assertion"),
        LabelPattern("SP", "specification clause"),
    )
    clause_keywords: tuple[str, ...] = DEFAULT_CLAUSE_KEYWORDS
    custom_tags: tuple[str, ...] = ("TODO",)

    def __post_init__(self) -> None:
        seen = set()
        for pat in self.label_patterns:
            if not pat.prefix.isalpha() or not pat.prefix.isupper():
                raise ConfigError(f"label prefix must be uppercase letters: {pat.prefix!r}")
            if pat.prefix in seen:
                raise ConfigError(f"duplicate label prefix: {pat.prefix!r}")
            seen.add(pat.prefix)

    @property
    def prefixes(self) -> tuple[str, ...]:
        return tuple(p.prefix for p in self.label_patterns)

    def keyword_table(self) -> list[tuple[str, str]]:
        """(spelling, canonical keyword) pairs, longest spelling first.

        Sketch synonyms canonicalize to SKETCH; custom tags map to
        themselves and keep their case when matched.
        """
        table: list[tuple[str, str]] = []
        for kw in self.clause_keywords:
            table.append((kw.upper(), kw.upper()))
        for syn in SKETCH_SYNONYMS:
            table.append((syn, "SKETCH"))
        for tag in self.custom_tags:
            table.append((tag.upper(), tag))
        # Longest first so IMPL SKETCH wins over IMPL.
        table.sort(key=lambda pair: len(pair[0]), reverse=True)
        return table


@dataclass(frozen=True)
class WatchConfig:
    debounce_ms: int = 300
    poll_interval_ms: int = 250

    def __post_init__(self) -> None:
        if self.debounce_ms < 0 or self.poll_interval_ms <= 0:
            raise ConfigError("watch intervals must be positive")


@dataclass(frozen=True)
class BackendConfig:
    """How to reach a consistency-check backend.

    kind is http, replay, or constant.  The HTTP key is read from the
    environment variable named by api_key_env; it never appears in any
    file this package reads or writes.  The default backend is constant
    with an unknown outcome, so checks run offline until configured.
    """

    kind: str = "constant"
    endpoint_url: str = ""
    api_key_env: str = "CODAT_API_KEY"
    fixture_dir: str = ""
    fixed_outcome: str = "unknown"
    timeout_s: float = 30.0
    max_retries: int = 2

    def __post_init__(self) -> None:
        if self.kind not in ("http", "replay", "constant"):
            raise ConfigError(f"unknown backend kind: {self.kind!r}")
        if self.kind == "http" and not self.endpoint_url:
            raise ConfigError("http backend needs endpoint_url")
        if self.kind == "constant" and self.fixed_outcome not in (
            "consistent",
            "inconsistent",
            "unknown",
        ):
            raise ConfigError(f"bad fixed_outcome: {self.fixed_outcome!r}")
        if self.timeout_s <= 0:
            raise ConfigError("timeout_s must be positive")
        if self.max_retries < 0:
            raise ConfigError("max_retries must be >= 0")

    @property
    def backend_id(self) -> str:
        if self.kind == "http":
            return f"http:{self.endpoint_url}"
        if self.kind == "constant":
            return f"constant:{self.fixed_outcome}"
        return "replay"


@dataclass(frozen=True)
class CheckConfig:
    backend: BackendConfig = field(default_factory=BackendConfig)
    parallelism: int = 2

    def __post_init__(self) -> None:
        if self.parallelism < 1:
            raise ConfigError("parallelism must be >= 1")


@dataclass(frozen=True)
class CodatConfig:
    syntax: SyntaxProfile = field(default_factory=SyntaxProfile)
    patterns: PatternConfig = field(default_factory=PatternConfig)
    watch: WatchConfig = field(default_factory=WatchConfig)
    check: CheckConfig = field(default_factory=CheckConfig)


_SECTION_RE = re.compile(r"^\[([A-Za-z0-9_.-]+)\]$")
_KEY_RE = re.compile(r"^([A-Za-z0-9_-]+)\s*=\s*(.+)$")


def _parse_scalar(raw: str, where: str) -> Any:
    raw = raw.strip()
    if raw.startswith('"'):
        m = re.match(r'^"((?:[^"\\]|\\.)*)"$', raw)
        if not m:
            raise ConfigError(f"{where}: unterminated string {raw!r}")
        return m.group(1).replace('\\"', '"').replace("\\\\", "\\")
    if raw in ("true", "false"):
        return raw == "true"
    if re.fullmatch(r"-?\d+", raw):
        return int(raw)
    if re.fullmatch(r"-?\d+\.\d+", raw):
        return float(raw)
    raise ConfigError(f"{where}: unsupported value {raw!r}")


def _parse_value(raw: str, where: str) -> Any:
    raw = raw.strip()
    if raw.startswith("["):
        if not raw.endswith("]"):
            raise ConfigError(f"{where}: unterminated array")
        inner = raw[1:-1].strip()
        if not inner:
            return []
        parts = re.findall(r'"(?:[^"\\]|\\.)*"', inner)
        rebuilt = ", ".join(parts)
        if re.sub(r"\s+", "", rebuilt) != re.sub(r"\s+", "", inner):
            raise ConfigError(f"{where}: arrays may only contain strings")
        return [_parse_scalar(p, where) for p in parts]
    return _parse_scalar(raw, where)


def parse_config_text(text: str) -> dict[str, dict[str, Any]]:
    """Parse the supported config subset into nested dicts."""
    sections: dict[str, dict[str, Any]] = {}
    current = sections.setdefault("", {})
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        where = f"line {lineno}"
        m = _SECTION_RE.match(stripped)
        if m:
            current = sections.setdefault(m.group(1), {})
            continue
        m = _KEY_RE.match(stripped)
        if not m:
            raise ConfigError(f"{where}: cannot parse {stripped!r}")
        key, raw = m.group(1), m.group(2)
        # Strip a trailing comment from unquoted scalars only.
        if not raw.lstrip().startswith(('"', "[")):
            raw = raw.split("#", 1)[0]
        current[key] = _parse_value(raw, where)
    return sections


def _take(section: dict[str, Any], key: str, default: Any) -> Any:
    value = section.pop(key, None)
    return default if value is None else value


def config_from_sections(sections: dict[str, dict[str, Any]]) -> CodatConfig:
    defaults = CodatConfig()
    sections = {k: dict(v) for k, v in sections.items()}
    sections.pop("", None)

    syn = sections.pop("syntax", {})
    syntax = SyntaxProfile(
        line_comment=_take(syn, "line_comment", defaults.syntax.line_comment),
        block_open=_take(syn, "block_open", defaults.syntax.block_open),
        block_close=_take(syn, "block_close", defaults.syntax.block_close),
        string_delimiters=tuple(
            _take(syn, "string_delimiters", list(defaults.syntax.string_delimiters))
        ),
        extensions=tuple(_take(syn, "extensions", list(defaults.syntax.extensions))),
    )
    if syn:
        raise ConfigError(f"unknown [syntax] keys: {sorted(syn)}")

    pat = sections.pop("patterns", {})
    labels = _take(pat, "labels", None)
    if labels is None:
        label_patterns = defaults.patterns.label_patterns
    else:
        parsed = []
        for item in labels:
            prefix, _, desc = item.partition("=")
            parsed.append(LabelPattern(prefix.strip(), desc.strip()))
        label_patterns = tuple(parsed)
    patterns = PatternConfig(
        label_patterns=label_patterns,
        clause_keywords=tuple(
            _take(pat, "clause_keywords", list(defaults.patterns.clause_keywords))
        ),
        custom_tags=tuple(_take(pat, "custom_tags", list(defaults.patterns.custom_tags))),
    )
    if pat:
        raise ConfigError(f"unknown [patterns] keys: {sorted(pat)}")

    wat = sections.pop("watch", {})
    watch = WatchConfig(
        debounce_ms=_take(wat, "debounce_ms", defaults.watch.debounce_ms),
        poll_interval_ms=_take(wat, "poll_interval_ms", defaults.watch.poll_interval_ms),
    )
    if wat:
        raise ConfigError(f"unknown [watch] keys: {sorted(wat)}")

    chk = sections.pop("check", {})
    backend = BackendConfig(
        kind=_take(chk, "backend", "constant"),
        endpoint_url=_take(chk, "endpoint_url", ""),
        api_key_env=_take(chk, "api_key_env", "CODAT_API_KEY"),
        fixture_dir=_take(chk, "fixture_dir", ""),
        fixed_outcome=_take(chk, "fixed_outcome", "unknown"),
        timeout_s=float(_take(chk, "timeout_s", 30.0)),
        max_retries=_take(chk, "max_retries", 2),
    )
    check = CheckConfig(backend=backend, parallelism=_take(chk, "parallelism", 2))
    if chk:
        raise ConfigError(f"unknown [check] keys: {sorted(chk)}")

    if sections:
        raise ConfigError(f"unknown config sections: {sorted(sections)}")
    return CodatConfig(syntax=syntax, patterns=patterns, watch=watch, check=check)


def load_config(root: Path, explicit_path: Optional[Path] = None) -> CodatConfig:
    """Load codat.toml from the project root, or defaults if absent."""
    path = explicit_path if explicit_path else Path(root) / CONFIG_FILENAME
    if explicit_path and not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    if not path.is_file():
        return CodatConfig()
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    return config_from_sections(parse_config_text(text))


def with_backend(config: CodatConfig, backend: BackendConfig) -> CodatConfig:
    return replace(config, check=replace(config.check, backend=backend))


def backend_from_spec(spec: str, config: CodatConfig) -> BackendConfig:
    """Build a backend from a CLI spec like replay:DIR or constant:consistent.

    Plain kinds (http, replay, constant) reuse any detail already in the
    loaded config.
    """
    kind, _, detail = spec.partition(":")
    base = config.check.backend
    if kind == "replay":
        return BackendConfig(kind="replay", fixture_dir=detail or base.fixture_dir)
    if kind == "constant":
        return BackendConfig(kind="constant", fixed_outcome=detail or "unknown")
    if kind == "http":
        return BackendConfig(
            kind="http",
            endpoint_url=detail or base.endpoint_url,
            api_key_env=base.api_key_env,
            timeout_s=base.timeout_s,
            max_retries=base.max_retries,
        )
    raise ConfigError(f"unknown backend spec: {spec!r}")
