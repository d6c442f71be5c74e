import os

import pytest

CORPUS = os.path.join(os.path.dirname(__file__), "corpus")


def corpus_path(name: str) -> str:
    return os.path.join(CORPUS, name)


def pytest_configure(config):
    config._acceptance = {}


@pytest.fixture
def criterion(request):
    """Record the outcome of an acceptance criterion for the end-of-run summary."""
    log = request.config._acceptance

    def record(number: int, title: str, passed: bool, detail: str = ""):
        log[number] = (title, passed, detail)
        return passed

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    log = getattr(config, "_acceptance", {})
    if not log:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(log):
        title, ok, detail = log[n]
        extra = f" ({detail})" if detail else ""
        terminalreporter.write_line(f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {title}{extra}")
