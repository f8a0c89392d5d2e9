from pathlib import Path

import pytest

from gentrans.scenario import load_scenario

DATA = Path(__file__).parent / "data"

_LOG_KEY = pytest.StashKey[list]()


@pytest.fixture
def data_dir() -> Path:
    return DATA


@pytest.fixture
def qzero():
    return load_scenario(DATA / "qzero.scn")


@pytest.fixture
def qposfull():
    return load_scenario(DATA / "qposfull.scn")


def pytest_configure(config):
    config.stash[_LOG_KEY] = []


@pytest.fixture
def acceptance_log(request):
    """Callable ``log(number, label, ok, detail)`` collected for the summary."""
    log = request.config.stash[_LOG_KEY]

    def record(number, label, ok, detail=""):
        log.append((number, label, bool(ok), detail))
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    log = config.stash.get(_LOG_KEY, [])
    if not log:
        return
    terminalreporter.section("acceptance criteria")
    for number, label, ok, detail in sorted(log, key=lambda r: r[0]):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {label}"
        if detail:
            line += f" -- {detail}"
        terminalreporter.write_line(line)
