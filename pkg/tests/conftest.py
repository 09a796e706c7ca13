from __future__ import annotations

import json
from pathlib import Path

import pytest

from codat.config import CodatConfig
from codat.corpus import GOLDEN_DIR, apply_bug_patch, load_corpus
from codat.engine import scan_project


@pytest.fixture(scope="session")
def golden_query() -> dict:
    return json.loads((GOLDEN_DIR / "query_java.json").read_text(encoding="utf-8"))


@pytest.fixture(scope="session")
def golden_files() -> dict:
    return json.loads((GOLDEN_DIR / "corpus_files.json").read_text(encoding="utf-8"))


@pytest.fixture(scope="session")
def golden_other() -> dict:
    return json.loads((GOLDEN_DIR / "other_files.json").read_text(encoding="utf-8"))


@pytest.fixture()
def corpus_dir(tmp_path: Path) -> Path:
    """A pristine copy of the bundled example project."""
    dest = tmp_path / "proj"
    load_corpus(dest)
    return dest


@pytest.fixture()
def buggy_dir(tmp_path: Path) -> Path:
    """The example project with the known addDoc bug applied."""
    dest = tmp_path / "proj_bug"
    load_corpus(dest)
    apply_bug_patch(dest)
    return dest


@pytest.fixture()
def config() -> CodatConfig:
    return CodatConfig()


@pytest.fixture()
def corpus_scan(corpus_dir: Path, config: CodatConfig):
    return scan_project(corpus_dir, config)
