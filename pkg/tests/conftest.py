"""Shared fixtures: the committed theory documents, parsed once per session.

Theories are immutable, so sharing parsed instances across tests is safe; the
only mutable attachment is the per-theory step cache, which is semantics
preserving.
"""
from __future__ import annotations

import json
import re
from pathlib import Path

import pytest

from concernkit import parse_theory

FIXTURE_DIR = Path(__file__).parent / "fixtures"

FIXTURE_NAMES = ("lkas_mini", "lkas_mini_attacked", "lkas_full", "conflict", "trivial")


def fixture_path(name: str) -> Path:
    return FIXTURE_DIR / f"{name}.cpst.json"


def fixture_text(name: str) -> str:
    return fixture_path(name).read_text(encoding="utf-8")


def fixture_document(name: str) -> dict:
    return json.loads(fixture_text(name))


def fixture_theory(name: str):
    return parse_theory(fixture_text(name))


@pytest.fixture(scope="session")
def lkas():
    return fixture_theory("lkas_mini")


@pytest.fixture(scope="session")
def lkas_attacked():
    return fixture_theory("lkas_mini_attacked")


@pytest.fixture(scope="session")
def lkas_wide():
    return fixture_theory("lkas_full")


@pytest.fixture(scope="session")
def conflicting():
    return fixture_theory("conflict")


@pytest.fixture(scope="session")
def trivial():
    return fixture_theory("trivial")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One verdict line per acceptance criterion, printed after the run."""
    rows = []
    for outcome, verdict in (("passed", "PASS"), ("failed", "FAIL"), ("error", "FAIL")):
        for report in terminalreporter.stats.get(outcome, []):
            m = re.search(r"test_acceptance\.py::test_criterion_(\d+)_(\w+)", report.nodeid)
            if m:
                rows.append((int(m.group(1)), verdict, m.group(2).replace("_", " ")))
    if rows:
        terminalreporter.write_sep("-", "acceptance criteria")
        for number, verdict, label in sorted(rows):
            terminalreporter.write_line(f"criterion {number}: {verdict} ({label})")
