import datetime as dt

import pytest

from newsenti.corpus import Article, TickerAliases
from newsenti.lexicon import load_bundled

_acceptance_lines = []


@pytest.fixture(scope="session")
def bundled():
    return load_bundled()


@pytest.fixture
def make_article():
    counter = iter(range(10**6))

    def make(heading="Acme wins", when=dt.datetime(2021, 3, 1, 10, 0), synopsis="", full_text="", sector="", id=None):
        return Article(id or f"a{next(counter)}", when, sector, heading, synopsis, full_text)

    return make


@pytest.fixture
def acme():
    return TickerAliases("ACME", ("Acme", "Acme Industries"))


def pytest_runtest_logreport(report):
    if report.when != "call" or "test_acceptance.py" not in report.nodeid:
        return
    label = report.nodeid.split("::")[-1]
    _acceptance_lines.append(f"{'PASS' if report.passed else 'FAIL'}  {label}  ({report.duration:.1f}s)")


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)
