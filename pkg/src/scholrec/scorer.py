"""Query construction and ranking: boosted fielded cosine with decay.

A reference document becomes a fielded query vector weighted against the
index statistics. Candidates come from the postings union of the query
terms; each is scored

    final = (sum_f boost_f * cos(q_f, d_f)) * decay(age) * popularity

and the ranking keeps strictly positive scores only, sorted descending with
ties broken by document id. Multiplicative composition keeps the decay
semantics independent of the text-score scale.
"""

from __future__ import annotations

import hashlib
import json
import math
import threading
from collections import OrderedDict
from dataclasses import dataclass, field
from datetime import date
from typing import Any, Callable, Hashable

from .corpus import CorpusStore, DocumentRecord, ReferenceDocument
from .errors import ValidationError
from .index import FIELDS, FieldedVector, Index, field_text, tfidf_weight, tokenize

DEFAULT_FIELD_BOOSTS = {"title": 3.0, "abstract": 2.0, "fulltext": 1.0, "authors": 0.5}

# Penalty applied when a document has no publication year: one half-life.
UNKNOWN_YEAR_DECAY = 0.5


@dataclass
class ScoringConfig:
    """Knobs of the ranking function, all surfaced for parameter sweeps."""

    field_boosts: dict[str, float] = field(
        default_factory=lambda: dict(DEFAULT_FIELD_BOOSTS)
    )
    decay_half_life_years: float = 5.0
    popularity_beta: float = 0.1
    candidate_pool_size: int = 200
    cache_capacity: int = 1024

    def validate(self) -> None:
        if any(boost < 0 for boost in self.field_boosts.values()):
            raise ValidationError("field boosts must be >= 0", field="field_boosts")
        if not any(boost > 0 for boost in self.field_boosts.values()):
            raise ValidationError(
                "at least one field boost must be positive", field="field_boosts"
            )
        unknown = set(self.field_boosts) - set(FIELDS)
        if unknown:
            raise ValidationError(
                f"unknown boost fields: {sorted(unknown)}", field="field_boosts"
            )
        if self.decay_half_life_years <= 0:
            raise ValidationError(
                "decay_half_life_years must be > 0", field="decay_half_life_years"
            )
        if self.popularity_beta < 0:
            raise ValidationError(
                "popularity_beta must be >= 0", field="popularity_beta"
            )
        if self.candidate_pool_size < 1:
            raise ValidationError(
                "candidate_pool_size must be >= 1", field="candidate_pool_size"
            )
        if self.cache_capacity < 1:
            raise ValidationError("cache_capacity must be >= 1", field="cache_capacity")

    def to_obj(self) -> dict[str, Any]:
        return {
            "field_boosts": dict(sorted(self.field_boosts.items())),
            "decay_half_life_years": self.decay_half_life_years,
            "popularity_beta": self.popularity_beta,
            "candidate_pool_size": self.candidate_pool_size,
            "cache_capacity": self.cache_capacity,
        }

    @classmethod
    def from_obj(cls, obj: dict[str, Any]) -> "ScoringConfig":
        config = cls()
        if "field_boosts" in obj:
            config.field_boosts = {
                str(k): float(v) for k, v in obj["field_boosts"].items()
            }
        for key in (
            "decay_half_life_years",
            "popularity_beta",
            "candidate_pool_size",
            "cache_capacity",
        ):
            if key in obj:
                value = obj[key]
                setattr(config, key, int(value) if key.endswith(("size", "capacity")) else float(value))
        config.validate()
        return config

    def fingerprint(self) -> str:
        """Stable digest of the exact configuration, for reproducible sweeps."""
        canonical = json.dumps(self.to_obj(), sort_keys=True)
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:12]


@dataclass
class ScoredCandidate:
    doc_id: str
    text_score: float
    decay_factor: float
    popularity_factor: float
    final_score: float

    def to_obj(self) -> dict[str, Any]:
        return {
            "doc_id": self.doc_id,
            "text_score": self.text_score,
            "decay_factor": self.decay_factor,
            "popularity_factor": self.popularity_factor,
            "final_score": self.final_score,
        }


def query_vector(
    ref: ReferenceDocument,
    matched: DocumentRecord | None,
    index: Index,
) -> FieldedVector:
    """Represent the reference document in the index's vector space.

    When the reference resolves to a corpus record its full indexed fields
    (including fulltext) back the query; otherwise only the metadata the
    caller supplied. Terms outside the index vocabulary are dropped, so the
    result may be empty: that is the empty-query condition, not an error.
    """
    texts: dict[str, str] = {}
    if matched is not None:
        for fld in FIELDS:
            texts[fld] = field_text(matched, fld)
    else:
        texts["title"] = ref.title or ""
        texts["authors"] = " ".join(ref.authors or [])
        texts["abstract"] = ref.abstract or ""
        texts["fulltext"] = ref.fulltext or ""

    weights: dict[str, dict[str, float]] = {}
    for fld, text in texts.items():
        tokens = tokenize(text)
        if not tokens:
            continue
        counts: dict[str, int] = {}
        for token in tokens:
            counts[token] = counts.get(token, 0) + 1
        field_weights: dict[str, float] = {}
        for term, tf in counts.items():
            df = index.term_df(fld, term)
            if df == 0:
                continue
            field_weights[term] = tfidf_weight(tf, df, index.doc_count)
        if field_weights:
            weights[fld] = field_weights
    return FieldedVector(weights)


def _cosine(q: FieldedVector, d: FieldedVector, fld: str) -> float:
    q_weights = q.field_weights(fld)
    d_weights = d.field_weights(fld)
    if not q_weights or not d_weights:
        return 0.0
    small, large = (
        (q_weights, d_weights) if len(q_weights) <= len(d_weights) else (d_weights, q_weights)
    )
    dot = 0.0
    for term, weight in small.items():
        other = large.get(term)
        if other is not None:
            dot += weight * other
    if dot == 0.0:
        return 0.0
    return dot / (q.norm(fld) * d.norm(fld))


def fielded_cosine(
    q: FieldedVector, d: FieldedVector, boosts: dict[str, float]
) -> float:
    """Sum of per-field cosines scaled by the field boosts."""
    score = 0.0
    for fld, boost in boosts.items():
        if boost <= 0.0:
            continue
        cos = _cosine(q, d, fld)
        if cos:
            score += boost * cos
    return score


def decay_factor(
    query_year: int | None,
    doc_year: int | None,
    half_life: float,
    now_year: int | None = None,
) -> float:
    """Exponential age decay in (0, 1].

    The anchor is the query's year when known, else the current year. A
    document without a year is penalized by exactly one half-life; a
    document newer than the anchor decays not at all.
    """
    if half_life <= 0:
        raise ValidationError("half_life must be > 0")
    if doc_year is None:
        return UNKNOWN_YEAR_DECAY
    reference_year = query_year if query_year is not None else (
        now_year if now_year is not None else date.today().year
    )
    delta = max(0, reference_year - doc_year)
    return 2.0 ** (-delta / half_life)


def popularity_factor(
    citations: int, downloads: int, readers: int, beta: float
) -> float:
    """1 + beta * log10(1 + total count); >= 1 always."""
    if min(citations, downloads, readers) < 0:
        raise ValidationError("counts must be >= 0")
    if beta < 0:
        raise ValidationError("beta must be >= 0")
    if beta == 0.0:
        return 1.0
    return 1.0 + beta * math.log10(1.0 + citations + downloads + readers)


def rank(
    query: FieldedVector,
    ref_year: int | None,
    index: Index,
    store: CorpusStore,
    config: ScoringConfig,
    exclude: frozenset[str] | set[str] = frozenset(),
    now_year: int | None = None,
) -> list[ScoredCandidate]:
    """Score the postings-union candidates and return the ranked pool.

    Only candidates with a strictly positive score survive: a zero text
    score means the document shares no boosted term with the query, which
    is not a match. Output is sorted by final score descending, ties by
    document id ascending, truncated to the configured pool size.
    """
    if query.is_empty:
        return []
    candidates: set[str] = set()
    for fld, terms in query.weights.items():
        if config.field_boosts.get(fld, 0.0) <= 0.0:
            continue  # zero-boost fields cannot contribute score
        field_postings = index.postings.get(fld, {})
        for term in terms:
            for doc_id, _ in field_postings.get(term, ()):
                candidates.add(doc_id)

    scored: list[ScoredCandidate] = []
    for doc_id in candidates:
        if doc_id in exclude:
            continue
        doc_vector = index.vector(doc_id)
        if doc_vector is None:
            continue
        text_score = fielded_cosine(query, doc_vector, config.field_boosts)
        if text_score <= 0.0:
            continue
        record = store.get(doc_id)
        doc_year = record.year if record else None
        decay = decay_factor(
            ref_year, doc_year, config.decay_half_life_years, now_year=now_year
        )
        popularity = popularity_factor(
            record.citation_count if record else 0,
            record.download_count if record else 0,
            record.reader_count if record else 0,
            config.popularity_beta,
        )
        scored.append(
            ScoredCandidate(
                doc_id=doc_id,
                text_score=text_score,
                decay_factor=decay,
                popularity_factor=popularity,
                final_score=text_score * decay * popularity,
            )
        )
    scored.sort(key=lambda c: (-c.final_score, c.doc_id))
    return scored[: config.candidate_pool_size]


class RankCache:
    """Thread-safe LRU cache with get-or-compute semantics.

    Concurrent callers with the same key may compute twice, but the first
    stored value is the canonical one: later arrivals return it.
    """

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValidationError("cache capacity must be >= 1")
        self.capacity = capacity
        self._entries: OrderedDict[Hashable, Any] = OrderedDict()
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0

    def get_or_compute(self, key: Hashable, compute: Callable[[], Any]) -> Any:
        with self._lock:
            if key in self._entries:
                self._entries.move_to_end(key)
                self.hits += 1
                return self._entries[key]
        value = compute()
        with self._lock:
            if key in self._entries:
                self._entries.move_to_end(key)
                self.hits += 1
                return self._entries[key]
            self.misses += 1
            self._entries[key] = value
            while len(self._entries) > self.capacity:
                self._entries.popitem(last=False)
        return value

    def __len__(self) -> int:
        return len(self._entries)


def cached_rank(
    cache: RankCache,
    reference_key: str,
    scope_key: str,
    limit: int,
    index_version: int,
    compute: Callable[[], list[ScoredCandidate]],
) -> list[ScoredCandidate]:
    """Rank through the LRU cache, keyed by reference, scope, limit and
    index version; any index rebuild makes prior keys unreachable."""
    key = (reference_key, scope_key, limit, index_version)
    return cache.get_or_compute(key, compute)


__all__ = [
    "DEFAULT_FIELD_BOOSTS",
    "RankCache",
    "ScoredCandidate",
    "ScoringConfig",
    "cached_rank",
    "decay_factor",
    "fielded_cosine",
    "popularity_factor",
    "query_vector",
    "rank",
]
