from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from konsepta import DatasetBundle, Store, load_dataset
from konsepta.ingest import FILE_NAMES, fixture_dir

import oracles

FIXTURE_DIR = fixture_dir()


def load_fixture_store() -> tuple[Store, object]:
    store = Store()
    report = load_dataset(DatasetBundle.read_dir(FIXTURE_DIR), store)
    assert report.rejected == 0, report.rejections
    return store, report


@pytest.fixture(scope="session")
def fixture_texts() -> dict[str, str]:
    return {
        kind: (FIXTURE_DIR / name).read_text(encoding="utf-8")
        for kind, name in FILE_NAMES.items()
    }


@pytest.fixture(scope="session")
def loaded() -> tuple[Store, object]:
    return load_fixture_store()


@pytest.fixture(scope="session")
def store(loaded) -> Store:
    """Session-wide store; read-only use. Mutation tests take fresh_store."""
    return loaded[0]


@pytest.fixture(scope="session")
def report(loaded):
    return loaded[1]


@pytest.fixture(scope="session")
def snap(store):
    return store.snapshot()


@pytest.fixture()
def fresh_store() -> Store:
    return load_fixture_store()[0]


@pytest.fixture(scope="session")
def raw(fixture_texts) -> oracles.RawData:
    return oracles.parse_raw(fixture_texts)
