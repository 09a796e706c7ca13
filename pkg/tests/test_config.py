from __future__ import annotations

from pathlib import Path

import pytest

from codat.config import (
    BackendConfig,
    CodatConfig,
    backend_from_spec,
    load_config,
    parse_config_text,
)
from codat.errors import ConfigError


def test_defaults_describe_c_family_sources():
    cfg = CodatConfig()
    assert cfg.syntax.line_comment == "//"
    assert cfg.syntax.block_open == "/*"
    assert cfg.syntax.block_close == "*/"
    assert set(cfg.syntax.string_delimiters) == {'"', "'"}
    assert ".java" in cfg.syntax.extensions
    assert cfg.patterns.prefixes == ("CS", "AS", "SP")
    assert cfg.watch.debounce_ms == 300
    assert cfg.check.backend.kind == "constant"


def test_parse_config_text_sections_and_types():
    text = """
# a comment
[syntax]
line_comment = "#"
extensions = [".py", ".pyi"]

[watch]
debounce_ms = 150
poll_interval_ms = 100

[check]
parallelism = 4
"""
    sections = parse_config_text(text)
    assert sections["syntax"]["line_comment"] == "#"
    assert sections["syntax"]["extensions"] == [".py", ".pyi"]
    assert sections["watch"]["debounce_ms"] == 150
    assert sections["check"]["parallelism"] == 4


def test_parse_config_text_booleans_floats_and_inline_comments():
    sections = parse_config_text("[check]\ntimeout_s = 2.5  # generous\n")
    assert sections["check"]["timeout_s"] == 2.5
    assert parse_config_text("[x]\nflag = true\n")["x"]["flag"] is True


def test_parse_config_text_rejects_bare_garbage():
    with pytest.raises(ConfigError):
        parse_config_text("[syntax]\nnot a key value line\n")


def test_load_config_reads_project_file(tmp_path: Path):
    (tmp_path / "codat.toml").write_text(
        '[patterns]\nlabels = ["CS", "AS", "SP", "QQ = query plan"]\n'
        'custom_tags = ["TODO", "FIXME"]\n',
        encoding="utf-8",
    )
    cfg = load_config(tmp_path)
    assert cfg.patterns.prefixes == ("CS", "AS", "SP", "QQ")
    assert cfg.patterns.label_patterns[3].description == "query plan"
    assert cfg.patterns.custom_tags == ("TODO", "FIXME")


def test_load_config_without_file_gives_defaults(tmp_path: Path):
    assert load_config(tmp_path) == CodatConfig()


def test_config_file_backend_defaults_to_offline_constant(tmp_path: Path):
    (tmp_path / "codat.toml").write_text("[check]\nparallelism = 3\n", encoding="utf-8")
    cfg = load_config(tmp_path)
    assert cfg.check.backend.kind == "constant"
    assert cfg.check.parallelism == 3


def test_unknown_keys_are_rejected(tmp_path: Path):
    (tmp_path / "codat.toml").write_text("[watch]\ncadence = 5\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_config(tmp_path)


def test_explicit_config_path_must_exist(tmp_path: Path):
    with pytest.raises(ConfigError):
        load_config(tmp_path, tmp_path / "nowhere.toml")


def test_keyword_table_is_longest_first_and_canonical():
    table = CodatConfig().patterns.keyword_table()
    spellings = [s for s, _ in table]
    assert spellings == sorted(spellings, key=len, reverse=True)
    by_spelling = dict(table)
    assert by_spelling["IMPL SKETCH"] == "SKETCH"
    assert by_spelling["IMPL"] == "SKETCH"
    assert by_spelling["CODE SKETCH"] == "SKETCH"
    assert by_spelling["EFFECTS"] == "EFFECTS"
    assert by_spelling["TODO"] == "TODO"


def test_backend_from_spec_forms():
    cfg = CodatConfig()
    replay = backend_from_spec("replay:/tmp/fixtures", cfg)
    assert replay.kind == "replay"
    assert replay.fixture_dir == "/tmp/fixtures"

    const = backend_from_spec("constant:inconsistent", cfg)
    assert const.kind == "constant"
    assert const.fixed_outcome == "inconsistent"

    http = backend_from_spec("http:http://localhost:9999/v1", cfg)
    assert http.kind == "http"
    assert http.endpoint_url == "http://localhost:9999/v1"


def test_backend_from_spec_rejects_unknown_kind():
    with pytest.raises(ConfigError):
        backend_from_spec("telepathy:now", CodatConfig())


def test_backend_id_strings():
    assert BackendConfig(kind="replay", fixture_dir="x").backend_id == "replay"
    assert (
        BackendConfig(kind="constant", fixed_outcome="unknown").backend_id
        == "constant:unknown"
    )
    assert (
        BackendConfig(kind="http", endpoint_url="http://h:1/v").backend_id
        == "http:http://h:1/v"
    )


def test_api_key_comes_from_environment_name_only():
    backend = BackendConfig(kind="http", endpoint_url="http://h:1/v")
    assert backend.api_key_env == "CODAT_API_KEY"
    assert not hasattr(backend, "api_key")
