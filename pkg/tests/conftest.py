from __future__ import annotations

import shutil

import pytest

from tpiet.workspace import FIXTURE, load_workspace

_criteria: dict[str, list] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(cid, text): acceptance criterion covered by a test")


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("criterion")
    if marker is None or call.when != "call":
        return
    cid, text = marker.args
    entry = _criteria.setdefault(cid, [text, True])
    if call.excinfo is not None:
        entry[1] = False


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(_criteria):
        text, ok = _criteria[cid]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} {cid}: {text}")


@pytest.fixture(scope="session")
def fixture_engine():
    engine, _ = load_workspace(FIXTURE)
    return engine


@pytest.fixture
def engine():
    """A fresh engine over the bundled fixture (safe to mutate)."""
    engine, _ = load_workspace(FIXTURE)
    return engine


@pytest.fixture
def workspace_copy(tmp_path):
    """Path to a writable copy of the fixture workspace."""
    dst = tmp_path / "ws"
    shutil.copytree(FIXTURE.parent, dst)
    return dst / FIXTURE.name
