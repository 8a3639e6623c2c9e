import pytest

from tiestrength.model import InteractionRecord, ParameterManifest, published_manifest

_criteria = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by the test")


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            _criteria[item.nodeid] = mark.args


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    outcome = {}
    for key in ("passed", "failed", "error", "skipped"):
        for rep in terminalreporter.stats.get(key, []):
            if rep.nodeid in _criteria and rep.when in ("call", "setup"):
                if key == "passed" and rep.when == "setup":
                    continue
                outcome[rep.nodeid] = key
    terminalreporter.section("acceptance criteria")
    for nodeid, (number, title) in sorted(_criteria.items(), key=lambda kv: kv[1][0]):
        status = outcome.get(nodeid)
        if status is None:
            continue
        word = "PASS" if status == "passed" else status.upper()
        terminalreporter.write_line(f"criterion {number:>2} {word:<7} {title}")


@pytest.fixture
def manifest():
    return published_manifest()


@pytest.fixture
def tiny_manifest():
    return ParameterManifest.from_pairs([("messages", "count"), ("comments", "count"), ("close", "binary")])


def rec(ego, friend, *values):
    return InteractionRecord(ego, friend, tuple(values))
