import sys
import time
from pathlib import Path

import pytest

from rankcompare.entity_link import link_datasets
from rankcompare.ingest import IndicatorDef, InstitutionRecord, RankingDataset, SystemManifest

TESTS = Path(__file__).parent
GOLDEN = TESTS / "golden"
sys.path.insert(0, str(TESTS))


def make_dataset(system_id, rows, indicators=("score",), kinds=None, lower=()):
    """rows: (local_id, name, country, {indicator: value})"""
    kinds = kinds or {}
    inds = tuple(IndicatorDef(n, kinds.get(n, "numeric"), n not in lower and kinds.get(n) != "rank")
                 for n in indicators)
    manifest = SystemManifest(system_id, system_id.title(), 2016, inds)
    recs = tuple(InstitutionRecord(lid, name, country, {n: vals.get(n) for n in indicators})
                 for lid, name, country, vals in rows)
    return RankingDataset(manifest, recs)


def make_corpus(datasets):
    corpus, _, _ = link_datasets(list(datasets))
    return corpus


@pytest.fixture
def tiny_pair():
    a = make_dataset("A", [
        ("1", "University of Alpha", "US", {"score": 10.0}),
        ("2", "Beta Institute of Technology", "DE", {"score": 20.0}),
        ("3", "Gamma University", "IT", {"score": 30.0}),
    ])
    b = make_dataset("B", [
        ("x", "Univ. of Alpha", "US", {"score": 3.0}),
        ("y", "Beta Inst. of Tech.", "DE", {"score": 1.0}),
        ("z", "Delta College", "FR", {"score": None}),
        ("w", "Epsilon University", "FR", {"score": 2.0}),
    ])
    return a, b


SUITE_BUDGET = 60.0


def pytest_sessionstart(session):
    session.started_at = time.perf_counter()


def pytest_sessionfinish(session, exitstatus):
    session.elapsed = time.perf_counter() - session.started_at
    if _acceptance_lines() and session.elapsed >= SUITE_BUDGET and exitstatus == 0:
        session.exitstatus = 1


def _acceptance_lines():
    mod = sys.modules.get("test_acceptance")
    return getattr(mod, "RESULTS", [])


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = _acceptance_lines()
    if not lines:
        return
    elapsed = getattr(terminalreporter._session, "elapsed", None) if hasattr(terminalreporter, "_session") \
        else None
    terminalreporter.section("acceptance criteria")
    for line in lines:
        terminalreporter.write_line(line)
    if elapsed is not None:
        ok = elapsed < SUITE_BUDGET
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion 8: whole session took "
                                    f"{elapsed:.1f} s (budget {SUITE_BUDGET:.0f} s)")
