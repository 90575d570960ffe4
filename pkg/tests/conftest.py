from __future__ import annotations

import json
from pathlib import Path

import pytest

from enthymeme import data_path
from enthymeme.providers import load_fixtures, stub_providers

HERE = Path(__file__).parent

WANT_GO = """(w / want-01
    :arg0 (b / boy)
    :arg1 (g / go-01
        :arg0 b))"""

WANT_NOT_GO = """(w / want-01
    :arg0 (b / boy)
    :arg1 (g / go-01
        :arg0 b
        :polarity -))"""


def bundled(name: str) -> Path:
    return Path(str(data_path(name)))


@pytest.fixture(scope="session")
def worked_fixtures() -> dict:
    return load_fixtures(bundled("worked_examples.json"))


@pytest.fixture(scope="session")
def worked_providers(worked_fixtures):
    return stub_providers(worked_fixtures)


@pytest.fixture(scope="session")
def spiderweb_fixtures() -> dict:
    return load_fixtures(bundled("spiderweb.json"))


@pytest.fixture(scope="session")
def mini_fixtures() -> dict:
    return load_fixtures(bundled("minicorpus_fixtures.json"))


@pytest.fixture(scope="session")
def mini_plan() -> dict:
    return json.loads((HERE / "data" / "minicorpus_plan.json").read_text(encoding="utf-8"))


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get(f"{__package__}.test_acceptance") if __package__ else None
    lines = list(getattr(module, "RESULTS", []))
    # a criterion whose test crashed before reporting still gets a FAIL line
    for report in terminalreporter.stats.get("failed", []):
        name = report.nodeid.rpartition("::")[2]
        if name.startswith("test_criterion_"):
            number = int(name.split("_")[2])
            if not any(line.split(":")[0].endswith(f" {number}") for line in lines):
                lines.append(f"FAIL criterion {number}: test raised {report.longrepr.reprcrash.message!r}")
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda l: int(l.split(":")[0].split()[-1])):
            terminalreporter.write_line(line)
