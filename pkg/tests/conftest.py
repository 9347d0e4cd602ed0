import os

import pytest


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: extended runs, enabled with BIASRACE_SLOW=1")


def pytest_collection_modifyitems(config, items):
    if os.environ.get("BIASRACE_SLOW") == "1":
        return
    skip = pytest.mark.skip(reason="extended run; set BIASRACE_SLOW=1")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


@pytest.fixture(scope="session", autouse=True)
def zero_cache(tmp_path_factory):
    """Zeros are computed once per session into a fresh directory, unless
    BIASRACE_TEST_CACHE points at a directory to reuse."""
    keep = os.environ.get("BIASRACE_TEST_CACHE")
    path = keep or str(tmp_path_factory.mktemp("zeros"))
    old = os.environ.get("BIASRACE_CACHE_DIR")
    os.environ["BIASRACE_CACHE_DIR"] = path
    yield path
    if old is None:
        os.environ.pop("BIASRACE_CACHE_DIR", None)
    else:
        os.environ["BIASRACE_CACHE_DIR"] = old


ACCEPTANCE = []


@pytest.fixture(scope="session")
def acceptance_log():
    """Criteria append (number, passed, line); the lines are repeated in the terminal summary."""
    return ACCEPTANCE


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for _, _, line in sorted(ACCEPTANCE, key=lambda r: r[0]):
        terminalreporter.write_line(line)
