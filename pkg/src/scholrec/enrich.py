"""Content enrichment: inferred language, key terms, popularity indicators.

Enrichment runs at index-build time over an immutable store and publishes a
new store; textual fields and ids are never touched.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable

from .corpus import CorpusStore, DocumentRecord
from .index import tfidf_weight, tokenize
from .stopwords import ALL_STOPWORDS, STOPWORDS, SUPPORTED_LANGUAGES

LANGUAGE_SCORE_THRESHOLD = 0.05

INDICATORS_HEADER = ["key", "citation_count", "download_count", "reader_count"]


@dataclass
class IndicatorRow:
    """External popularity counts keyed by record id or DOI."""

    key: str
    citation_count: int = 0
    download_count: int = 0
    reader_count: int = 0


@dataclass
class JoinReport:
    matched: int = 0
    unmatched: int = 0
    rejected: int = 0


def infer_language(record: DocumentRecord) -> str:
    """Classify title+abstract by stopword-profile overlap.

    An already-set language is returned unchanged. The score per language is
    the fraction of tokens that hit its stopword list; the best language
    wins when it reaches 0.05, ties broken by lexicographic code, otherwise
    "und".
    """
    if record.language:
        return record.language
    tokens = tokenize(f"{record.title} {record.abstract}")
    if not tokens:
        return "und"
    best_lang = "und"
    best_score = 0.0
    for lang in SUPPORTED_LANGUAGES:
        profile = STOPWORDS[lang]
        hits = sum(1 for token in tokens if token in profile)
        score = hits / len(tokens)
        if score > best_score:
            best_lang, best_score = lang, score
    return best_lang if best_score >= LANGUAGE_SCORE_THRESHOLD else "und"


def combined_text(record: DocumentRecord) -> str:
    parts = [record.title, record.abstract]
    if record.has_fulltext:
        parts.append(record.fulltext or "")
    return " ".join(parts)


def document_frequencies(store: CorpusStore) -> dict[str, int]:
    """Corpus df over each record's combined title+abstract+fulltext."""
    df: dict[str, int] = {}
    for record in store:
        for term in set(tokenize(combined_text(record))):
            df[term] = df.get(term, 0) + 1
    return df


def extract_key_terms(
    record: DocumentRecord,
    k: int,
    df: dict[str, int],
    n_docs: int,
) -> list[str]:
    """Top-k non-stopword tokens of the combined text by TF-IDF weight.

    Ordered by descending weight, ties by lexicographic token. Fewer than k
    candidates yield a shorter list.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    counts: dict[str, int] = {}
    for token in tokenize(combined_text(record)):
        if token in ALL_STOPWORDS:
            continue
        counts[token] = counts.get(token, 0) + 1
    weighted = [
        (tfidf_weight(tf, min(max(df.get(term, 1), 1), n_docs), n_docs), term)
        for term, tf in counts.items()
    ]
    weighted.sort(key=lambda pair: (-pair[0], pair[1]))
    return [term for _, term in weighted[:k]]


def enrich_store(store: CorpusStore, key_term_count: int | None = None) -> CorpusStore:
    """Infer missing languages and (optionally) key terms for every record."""
    df = document_frequencies(store) if key_term_count else {}
    updated = []
    for record in store:
        changes: dict = {}
        language = infer_language(record)
        if language != record.language:
            changes["language"] = language
        if key_term_count and record.key_terms is None:
            changes["key_terms"] = extract_key_terms(
                record, key_term_count, df, len(store)
            )
        if changes:
            updated.append(replace(record, **changes))
    return store.with_records(updated) if updated else store


def read_indicators(path: str | Path) -> tuple[list[IndicatorRow], int]:
    """Read the indicators CSV; malformed rows are skipped and counted."""
    rows: list[IndicatorRow] = []
    skipped = 0
    with open(path, "r", encoding="utf-8", newline="") as handle:
        reader = csv.DictReader(handle)
        for raw in reader:
            key = (raw.get("key") or "").strip()
            if not key:
                skipped += 1
                continue
            try:
                rows.append(
                    IndicatorRow(
                        key=key,
                        citation_count=int(raw.get("citation_count") or 0),
                        download_count=int(raw.get("download_count") or 0),
                        reader_count=int(raw.get("reader_count") or 0),
                    )
                )
            except (TypeError, ValueError):
                skipped += 1
    return rows, skipped


def join_indicators(
    store: CorpusStore, rows: Iterable[IndicatorRow]
) -> tuple[CorpusStore, JoinReport]:
    """Overwrite popularity counts from indicator rows; last row wins.

    Rows match by record id first, then DOI (case-insensitive). Rows with a
    negative count are rejected; rows matching nothing are counted as
    unmatched. The input store is left untouched.
    """
    report = JoinReport()
    pending: dict[str, IndicatorRow] = {}
    for row in rows:
        if min(row.citation_count, row.download_count, row.reader_count) < 0:
            report.rejected += 1
            continue
        record = store.get(row.key) or store.by_doi(row.key)
        if record is None:
            report.unmatched += 1
            continue
        report.matched += 1
        pending[record.id] = row
    updated = [
        replace(
            store.get(doc_id),
            citation_count=row.citation_count,
            download_count=row.download_count,
            reader_count=row.reader_count,
        )
        for doc_id, row in pending.items()
    ]
    return (store.with_records(updated) if updated else store), report


__all__ = [
    "IndicatorRow",
    "JoinReport",
    "document_frequencies",
    "enrich_store",
    "extract_key_terms",
    "infer_language",
    "join_indicators",
    "read_indicators",
]
