"""Shared fixtures and the acceptance-criteria result summary."""

from __future__ import annotations

import json

import pytest

from scholrec.corpus import CorpusStore, DocumentRecord


@pytest.fixture
def make_record():
    """Factory for fully-populated, eligible records with overridable fields."""

    def factory(doc_id: str, **overrides) -> DocumentRecord:
        fields = {
            "id": doc_id,
            "title": f"study of topic {doc_id}",
            "authors": ["Ada Author"],
            "abstract": f"an abstract about topic {doc_id}",
            "fulltext": f"full text body for {doc_id}",
            "year": 2015,
            "repository_id": "r1",
            "has_thumbnail": True,
            "citation_count": 0,
            "download_count": 0,
            "reader_count": 0,
        }
        fields.update(overrides)
        return DocumentRecord(**fields)

    return factory


@pytest.fixture
def write_corpus(tmp_path):
    """Write records (or raw dicts) to a JSONL corpus file, return the path."""

    def writer(records, name: str = "corpus.jsonl"):
        path = tmp_path / name
        with open(path, "w", encoding="utf-8") as handle:
            for record in records:
                obj = record.to_obj() if isinstance(record, DocumentRecord) else record
                handle.write(json.dumps(obj) + "\n")
        return path

    return writer


@pytest.fixture
def store_factory():
    def factory(records) -> CorpusStore:
        return CorpusStore(records)

    return factory


_ACCEPTANCE_RESULTS: list[tuple[str, str]] = []


def pytest_runtest_logreport(report):
    if "test_acceptance" in report.nodeid and report.when == "call":
        name = report.nodeid.split("::")[-1]
        _ACCEPTANCE_RESULTS.append((name, "PASS" if report.passed else "FAIL"))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"{outcome}  {name}")
