"""Fielded inverted index with TF-IDF weights: the vector-space substrate.

Each document contributes one sparse term-weight vector per field (title,
authors, abstract, fulltext). Weights use log-scaled term frequency times
raw inverse document frequency, (1 + ln tf) * ln(N / df). Terms present in
every document of a field carry zero weight everywhere, so they are pruned
from the index entirely; scoring is unaffected because a zero weight
contributes nothing to either dot products or norms.

An Index is immutable after build. Rebuilds allocate a fresh, strictly
increasing index_version so caches keyed on the version can never serve
stale results.
"""

from __future__ import annotations

import json
import math
import re
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from .corpus import CorpusStore, DocumentRecord
from .errors import ValidationError

FIELDS = ("title", "authors", "abstract", "fulltext")

SNAPSHOT_FORMAT_VERSION = 1

_ALNUM_RUN = re.compile(r"[^\W_]+")
_HAS_DIGIT = re.compile(r"\d")
# A digit immediately followed by a letter starts a new token ("p2p" -> "p2", "p").
_DIGIT_LETTER_BOUNDARY = re.compile(r"(?<=\d)(?=[^\W\d_])")

_version_lock = threading.Lock()
_next_version = 1


def _allocate_version(at_least: int = 0) -> int:
    global _next_version
    with _version_lock:
        version = max(_next_version, at_least)
        _next_version = version + 1
        return version


def tokenize(text: str) -> list[str]:
    """Unicode-lowercase, split to alphanumeric runs, drop tokens under 2 chars."""
    if not text:
        return []
    tokens: list[str] = []
    for run in _ALNUM_RUN.findall(text.lower()):
        if _HAS_DIGIT.search(run):
            pieces = _DIGIT_LETTER_BOUNDARY.split(run)
        else:
            pieces = [run]
        for piece in pieces:
            if len(piece) >= 2:
                tokens.append(piece)
    return tokens


def tfidf_weight(raw_tf: float, df: int, n_docs: int) -> float:
    """(1 + ln tf) * ln(N / df). Zero when the term is in every document."""
    if raw_tf < 1:
        raise ValidationError(f"raw_tf must be >= 1, got {raw_tf}")
    if df < 1 or df > n_docs:
        raise ValidationError(f"df must be in [1, {n_docs}], got {df}")
    return (1.0 + math.log(raw_tf)) * math.log(n_docs / df)


def field_text(record: DocumentRecord, field: str) -> str:
    """Raw text backing one indexed field; empty when absent."""
    if field == "title":
        return record.title
    if field == "authors":
        return " ".join(record.authors)
    if field == "abstract":
        return record.abstract
    if field == "fulltext":
        return record.fulltext if record.has_fulltext else ""
    raise ValidationError(f"unknown field {field!r}")


class FieldedVector:
    """Per-field sparse term-weight maps with cached L2 norms.

    Zero-weight entries are pruned at construction so the stored maps
    contain strictly positive weights only.
    """

    __slots__ = ("weights", "_norms")

    def __init__(self, weights: dict[str, dict[str, float]]):
        self.weights: dict[str, dict[str, float]] = {}
        self._norms: dict[str, float] = {}
        for field, terms in weights.items():
            pruned = {t: w for t, w in terms.items() if w > 0.0}
            if pruned:
                self.weights[field] = pruned
                self._norms[field] = math.sqrt(math.fsum(w * w for w in pruned.values()))

    def field_weights(self, field: str) -> dict[str, float]:
        return self.weights.get(field, {})

    def norm(self, field: str) -> float:
        return self._norms.get(field, 0.0)

    @property
    def is_empty(self) -> bool:
        return not self.weights

    def to_obj(self) -> dict[str, dict[str, float]]:
        return {f: dict(sorted(w.items())) for f, w in sorted(self.weights.items())}


@dataclass
class Index:
    """Immutable fielded index: document frequencies, vectors and postings."""

    doc_count: int
    df: dict[str, dict[str, int]]
    vectors: dict[str, FieldedVector]
    postings: dict[str, dict[str, list[tuple[str, float]]]]
    index_version: int

    def vector(self, doc_id: str) -> FieldedVector | None:
        return self.vectors.get(doc_id)

    def term_df(self, field: str, term: str) -> int:
        return self.df.get(field, {}).get(term, 0)

    def postings_for(self, field: str, term: str) -> list[tuple[str, float]]:
        return self.postings.get(field, {}).get(term, [])

    def canonical_postings_json(self) -> str:
        """Deterministic serialization of the postings, for comparison."""
        obj = {
            field: {term: plist for term, plist in sorted(terms.items())}
            for field, terms in sorted(self.postings.items())
        }
        return json.dumps(obj, sort_keys=True)


def build_index(store: CorpusStore) -> Index:
    """Build a fresh index over every record of the store.

    Deterministic given the store: postings are sorted by document id and
    weights depend only on term statistics. The fulltext field is populated
    only for records that actually carry text.
    """
    n_docs = len(store)
    tf_maps: dict[str, dict[str, dict[str, int]]] = {}
    df: dict[str, dict[str, int]] = {field: {} for field in FIELDS}

    for record in store:
        per_doc: dict[str, dict[str, int]] = {}
        for field in FIELDS:
            tokens = tokenize(field_text(record, field))
            if not tokens:
                continue
            counts: dict[str, int] = {}
            for token in tokens:
                counts[token] = counts.get(token, 0) + 1
            per_doc[field] = counts
            field_df = df[field]
            for term in counts:
                field_df[term] = field_df.get(term, 0) + 1
        tf_maps[record.id] = per_doc

    vectors: dict[str, FieldedVector] = {}
    postings: dict[str, dict[str, list[tuple[str, float]]]] = {
        field: {} for field in FIELDS
    }
    for record in store:
        weights: dict[str, dict[str, float]] = {}
        for field, counts in tf_maps[record.id].items():
            field_df = df[field]
            field_weights = {}
            for term, tf in counts.items():
                term_df = field_df[term]
                if term_df >= n_docs:
                    continue  # ubiquitous term, weight would be zero
                field_weights[term] = tfidf_weight(tf, term_df, n_docs)
            if field_weights:
                weights[field] = field_weights
        vector = FieldedVector(weights)
        vectors[record.id] = vector
        for field, field_weights in vector.weights.items():
            field_postings = postings[field]
            for term, weight in field_weights.items():
                field_postings.setdefault(term, []).append((record.id, weight))

    for field_postings in postings.values():
        for plist in field_postings.values():
            plist.sort(key=lambda entry: entry[0])

    # Drop df entries for terms that were pruned everywhere (df == N): they
    # can never contribute to a score, and dropping them keeps the postings
    # and df maps in one-to-one correspondence.
    pruned_df = {
        field: {term: n for term, n in terms.items() if n < n_docs}
        for field, terms in df.items()
    }

    return Index(
        doc_count=n_docs,
        df=pruned_df,
        vectors=vectors,
        postings=postings,
        index_version=_allocate_version(),
    )


def save_snapshot(index: Index, path: str | Path) -> None:
    """Write the index as JSONL: one header line, then one line per term."""
    with open(path, "w", encoding="utf-8") as handle:
        header = {
            "format_version": SNAPSHOT_FORMAT_VERSION,
            "index_version": index.index_version,
            "doc_count": index.doc_count,
            "doc_ids": list(index.vectors),
        }
        handle.write(json.dumps(header) + "\n")
        for field in sorted(index.postings):
            for term in sorted(index.postings[field]):
                entry = {
                    "field": field,
                    "term": term,
                    "df": index.df[field][term],
                    "postings": [[doc, w] for doc, w in index.postings[field][term]],
                }
                handle.write(json.dumps(entry) + "\n")


def load_snapshot(path: str | Path) -> Index:
    """Reconstruct an index from a snapshot; exact round-trip of a save."""
    with open(path, "r", encoding="utf-8") as handle:
        header_line = handle.readline()
        if not header_line.strip():
            raise ValidationError("snapshot is empty")
        header = json.loads(header_line)
        if header.get("format_version") != SNAPSHOT_FORMAT_VERSION:
            raise ValidationError(
                f"unsupported snapshot format_version {header.get('format_version')!r}"
            )
        doc_ids: list[str] = header["doc_ids"]
        df: dict[str, dict[str, int]] = {field: {} for field in FIELDS}
        postings: dict[str, dict[str, list[tuple[str, float]]]] = {
            field: {} for field in FIELDS
        }
        weights: dict[str, dict[str, dict[str, float]]] = {doc: {} for doc in doc_ids}
        for line in handle:
            if not line.strip():
                continue
            entry = json.loads(line)
            field, term = entry["field"], entry["term"]
            df.setdefault(field, {})[term] = entry["df"]
            plist = [(doc, float(w)) for doc, w in entry["postings"]]
            postings.setdefault(field, {})[term] = plist
            for doc, weight in plist:
                weights[doc].setdefault(field, {})[term] = weight

    vectors = {doc: FieldedVector(weights[doc]) for doc in doc_ids}
    version = int(header["index_version"])
    _allocate_version(at_least=version + 1)  # future builds stay ahead
    return Index(
        doc_count=int(header["doc_count"]),
        df=df,
        vectors=vectors,
        postings=postings,
        index_version=version,
    )


def check_index_invariants(index: Index) -> None:
    """Full-scan structural check; raises on the first violation."""
    for field, terms in index.postings.items():
        for term, plist in terms.items():
            docs = {doc for doc, _ in plist}
            if len(docs) != len(plist):
                raise AssertionError(f"duplicate postings for {field}/{term}")
            if len(docs) != index.df[field][term]:
                raise AssertionError(
                    f"df mismatch for {field}/{term}: "
                    f"{len(docs)} postings vs df {index.df[field][term]}"
                )
            for doc, weight in plist:
                if weight <= 0.0:
                    raise AssertionError(f"non-positive weight stored for {field}/{term}")
                stored = index.vectors[doc].field_weights(field).get(term)
                if stored != weight:
                    raise AssertionError(f"vector/postings divergence for {doc}")
    for doc_id, vector in index.vectors.items():
        for field in vector.weights:
            recomputed = math.sqrt(
                math.fsum(w * w for w in vector.field_weights(field).values())
            )
            if abs(recomputed - vector.norm(field)) > 1e-9:
                raise AssertionError(f"stale norm cache for {doc_id}/{field}")


__all__ = [
    "FIELDS",
    "FieldedVector",
    "Index",
    "build_index",
    "check_index_invariants",
    "field_text",
    "load_snapshot",
    "save_snapshot",
    "tfidf_weight",
    "tokenize",
]
