"""Document corpus: ingest, validation, normalization and reference resolution.

The corpus is a JSON Lines file, one document per line. Records are
validated on ingest and held in an in-memory store that is immutable after
load, so any number of readers may share one store.
"""

from __future__ import annotations

import json
import unicodedata
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path
from typing import Any, Iterable, Iterator

from .errors import DuplicateIdError, ParseError, ValidationError

MIN_YEAR = 1400

# Fields accepted in a corpus line. Anything else is ignored and counted.
KNOWN_FIELDS = frozenset(
    {
        "id",
        "doi",
        "title",
        "authors",
        "abstract",
        "fulltext",
        "year",
        "language",
        "key_terms",
        "repository_id",
        "has_fulltext",
        "has_thumbnail",
        "citation_count",
        "download_count",
        "reader_count",
    }
)

COUNT_FIELDS = ("citation_count", "download_count", "reader_count")


def max_valid_year() -> int:
    """Upper year bound: allows in-press items one year ahead."""
    return date.today().year + 1


@dataclass
class DocumentRecord:
    """One scholarly item with fielded text, flags and popularity counts."""

    id: str
    title: str = ""
    authors: list[str] = field(default_factory=list)
    abstract: str = ""
    doi: str | None = None
    fulltext: str | None = None
    year: int | None = None
    language: str | None = None
    key_terms: list[str] | None = None
    repository_id: str = ""
    has_thumbnail: bool = False
    citation_count: int = 0
    download_count: int = 0
    reader_count: int = 0

    @property
    def has_fulltext(self) -> bool:
        """True iff fulltext is present and non-empty after whitespace trim."""
        return bool(self.fulltext and self.fulltext.strip())

    @property
    def first_author(self) -> str:
        return self.authors[0] if self.authors else ""

    def to_obj(self) -> dict[str, Any]:
        """Serializable dict with exact corpus-file field names."""
        obj: dict[str, Any] = {
            "id": self.id,
            "title": self.title,
            "authors": list(self.authors),
            "abstract": self.abstract,
            "repository_id": self.repository_id,
            "has_fulltext": self.has_fulltext,
            "has_thumbnail": self.has_thumbnail,
            "citation_count": self.citation_count,
            "download_count": self.download_count,
            "reader_count": self.reader_count,
        }
        if self.doi is not None:
            obj["doi"] = self.doi
        if self.fulltext is not None:
            obj["fulltext"] = self.fulltext
        if self.year is not None:
            obj["year"] = self.year
        if self.language is not None:
            obj["language"] = self.language
        if self.key_terms is not None:
            obj["key_terms"] = list(self.key_terms)
        return obj


@dataclass
class ReferenceDocument:
    """Incoming query item: an identifier and whatever metadata is known."""

    id: str | None = None
    doi: str | None = None
    title: str | None = None
    authors: list[str] | None = None
    abstract: str | None = None
    year: int | None = None
    fulltext: str | None = None

    def validate(self) -> None:
        if not (self.id or self.doi or self.title):
            raise ValidationError(
                "reference document needs at least one of id, doi or title",
                field="document",
            )


@dataclass
class LoadReport:
    """Outcome counters for one corpus load."""

    loaded: int = 0
    skipped: int = 0
    unknown_fields: int = 0
    errors: list[str] = field(default_factory=list)

    MAX_ERRORS = 20

    def note_error(self, message: str) -> None:
        self.skipped += 1
        if len(self.errors) < self.MAX_ERRORS:
            self.errors.append(message)


def _require_str(obj: dict, key: str, default: str = "") -> str:
    value = obj.get(key, default)
    if value is None:
        return default
    if not isinstance(value, str):
        raise ValidationError(f"{key} must be a string", field=key)
    return value


def _optional_str(obj: dict, key: str) -> str | None:
    value = obj.get(key)
    if value is None:
        return None
    if not isinstance(value, str):
        raise ValidationError(f"{key} must be a string", field=key)
    value = value.strip()
    return value or None


def _str_list(obj: dict, key: str) -> list[str] | None:
    value = obj.get(key)
    if value is None:
        return None
    if not isinstance(value, list) or any(not isinstance(v, str) for v in value):
        raise ValidationError(f"{key} must be a list of strings", field=key)
    return list(value)


def _non_negative_int(obj: dict, key: str) -> int:
    value = obj.get(key, 0)
    if value is None:
        return 0
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValidationError(f"{key} must be an integer", field=key)
    if value < 0:
        raise ValidationError(f"{key} must be >= 0", field=key)
    return value


def record_from_obj(obj: dict[str, Any]) -> tuple[DocumentRecord, int]:
    """Validate one decoded corpus object.

    Returns the record and the number of unknown fields that were ignored.
    ``has_fulltext`` is derived from ``fulltext``; any stored value is
    ignored so the invariant holds by construction.
    """
    if not isinstance(obj, dict):
        raise ValidationError("corpus line must be a JSON object")
    unknown = sum(1 for key in obj if key not in KNOWN_FIELDS)

    doc_id = obj.get("id")
    if not isinstance(doc_id, str) or not doc_id:
        raise ValidationError("id is required and must be a non-empty string", field="id")

    year = obj.get("year")
    if year is not None:
        if isinstance(year, bool) or not isinstance(year, int):
            raise ValidationError("year must be an integer", field="year")
        if not MIN_YEAR <= year <= max_valid_year():
            raise ValidationError(
                f"year {year} outside [{MIN_YEAR}, {max_valid_year()}]", field="year"
            )

    has_thumbnail = obj.get("has_thumbnail", False)
    if not isinstance(has_thumbnail, bool):
        raise ValidationError("has_thumbnail must be a boolean", field="has_thumbnail")

    fulltext = obj.get("fulltext")
    if fulltext is not None and not isinstance(fulltext, str):
        raise ValidationError("fulltext must be a string", field="fulltext")

    record = DocumentRecord(
        id=doc_id,
        title=_require_str(obj, "title"),
        authors=_str_list(obj, "authors") or [],
        abstract=_require_str(obj, "abstract"),
        doi=_optional_str(obj, "doi"),
        fulltext=fulltext,
        year=year,
        language=_optional_str(obj, "language"),
        key_terms=_str_list(obj, "key_terms"),
        repository_id=_require_str(obj, "repository_id"),
        has_thumbnail=has_thumbnail,
        citation_count=_non_negative_int(obj, "citation_count"),
        download_count=_non_negative_int(obj, "download_count"),
        reader_count=_non_negative_int(obj, "reader_count"),
    )
    return record, unknown


def parse_record(line: str, line_number: int | None = None) -> DocumentRecord:
    """Parse and validate a single corpus JSON line."""
    where = f"line {line_number}: " if line_number is not None else ""
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{where}malformed JSON: {exc.msg}") from exc
    try:
        record, _ = record_from_obj(obj)
    except ValidationError as exc:
        raise ValidationError(f"{where}{exc}", field=exc.field) from exc
    return record


def normalize_title(title: str) -> str:
    """Canonical matching key: lowercase, punctuation/symbols to spaces.

    Runs of whitespace collapse to a single space and the result is trimmed.
    """
    lowered = title.lower()
    chars = [
        " " if unicodedata.category(c)[0] in ("P", "S") else c for c in lowered
    ]
    return " ".join("".join(chars).split())


class CorpusStore:
    """Immutable-after-load store of validated records keyed by id.

    Secondary lookup structures (DOI, normalized title) are built once at
    construction, so reads are safe from any number of threads.
    """

    def __init__(self, records: Iterable[DocumentRecord]):
        self._records: dict[str, DocumentRecord] = {}
        self._by_doi: dict[str, str] = {}
        self._by_title: dict[str, list[str]] = {}
        for record in records:
            if record.id in self._records:
                raise DuplicateIdError(f"duplicate record id {record.id!r}")
            self._records[record.id] = record
            if record.doi:
                # First occurrence wins; same-DOI records are the same work.
                self._by_doi.setdefault(record.doi.lower(), record.id)
            key = normalize_title(record.title)
            if key:
                self._by_title.setdefault(key, []).append(record.id)

    def __len__(self) -> int:
        return len(self._records)

    def __contains__(self, doc_id: str) -> bool:
        return doc_id in self._records

    def __iter__(self) -> Iterator[DocumentRecord]:
        return iter(self._records.values())

    def get(self, doc_id: str) -> DocumentRecord | None:
        return self._records.get(doc_id)

    def ids(self) -> list[str]:
        return list(self._records)

    def by_doi(self, doi: str) -> DocumentRecord | None:
        doc_id = self._by_doi.get(doi.lower())
        return self._records[doc_id] if doc_id else None

    def by_normalized_title(self, key: str) -> list[DocumentRecord]:
        return [self._records[i] for i in self._by_title.get(key, [])]

    def with_records(self, updated: Iterable[DocumentRecord]) -> "CorpusStore":
        """New store with the given records replacing same-id entries."""
        merged = dict(self._records)
        for record in updated:
            if record.id not in merged:
                raise ValidationError(f"unknown record id {record.id!r}")
            merged[record.id] = record
        return CorpusStore(merged.values())

    def write_jsonl(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as handle:
            for record in self:
                handle.write(json.dumps(record.to_obj(), ensure_ascii=False) + "\n")


def load_corpus(path: str | Path) -> tuple[CorpusStore, LoadReport]:
    """Load a JSON Lines corpus file.

    Invalid lines are skipped and counted; a duplicate id is a hard error
    naming both line numbers. Unreadable files raise the underlying OSError.
    """
    report = LoadReport()
    records: dict[str, DocumentRecord] = {}
    first_line: dict[str, int] = {}
    with open(path, "r", encoding="utf-8") as handle:
        for line_number, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                report.note_error(f"line {line_number}: malformed JSON: {exc.msg}")
                continue
            try:
                record, unknown = record_from_obj(obj)
            except ValidationError as exc:
                report.note_error(f"line {line_number}: {exc}")
                continue
            if record.id in records:
                raise DuplicateIdError(
                    f"duplicate id {record.id!r} on lines "
                    f"{first_line[record.id]} and {line_number}"
                )
            records[record.id] = record
            first_line[record.id] = line_number
            report.unknown_fields += unknown
            report.loaded += 1
    return CorpusStore(records.values()), report


def match_reference(ref: ReferenceDocument, store: CorpusStore) -> DocumentRecord | None:
    """Resolve a reference document against the corpus.

    Resolution order: exact id, exact DOI (case-insensitive), then
    normalized-title equality (plus year equality when both sides carry a
    year). An ambiguous title match (two or more hits) resolves to None
    rather than an arbitrary pick.
    """
    if ref.id:
        record = store.get(ref.id)
        if record is not None:
            return record
    if ref.doi:
        record = store.by_doi(ref.doi)
        if record is not None:
            return record
    if ref.title:
        key = normalize_title(ref.title)
        if not key:
            return None
        hits = [
            record
            for record in store.by_normalized_title(key)
            if ref.year is None or record.year is None or record.year == ref.year
        ]
        if len(hits) == 1:
            return hits[0]
    return None


__all__ = [
    "CorpusStore",
    "DocumentRecord",
    "LoadReport",
    "ReferenceDocument",
    "load_corpus",
    "match_reference",
    "normalize_title",
    "parse_record",
    "record_from_obj",
]
