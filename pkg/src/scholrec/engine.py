"""Recommendation engine: one object wiring corpus, index, scorer and filters.

The engine owns an atomically swappable (store, index) snapshot, the rank
cache and the blacklist, and exposes the single entry point the HTTP
service, the CLI and the evaluation harness all share.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

from .corpus import CorpusStore, DocumentRecord, ReferenceDocument, match_reference
from .errors import EmptyQueryError
from .feedback import BlacklistStore
from .index import Index, build_index
from .pipeline import RecommendationList, Scope, assemble
from .scorer import RankCache, ScoringConfig, cached_rank, query_vector, rank


def anonymous_reference_key(ref: ReferenceDocument) -> str:
    """Deterministic key for a reference that resolves to no corpus record."""
    payload = json.dumps(
        {
            "id": ref.id,
            "doi": ref.doi,
            "title": ref.title,
            "authors": ref.authors,
            "abstract": ref.abstract,
            "year": ref.year,
        },
        sort_keys=True,
        ensure_ascii=False,
    )
    return "ref:" + hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]


@dataclass
class RecommendOutcome:
    recommendations: RecommendationList
    resolved: bool
    matched_id: str | None
    reference_key: str


class _Snapshot:
    __slots__ = ("store", "index")

    def __init__(self, store: CorpusStore, index: Index):
        self.store = store
        self.index = index


class Recommender:
    """Query-time composition: match, vectorize, rank (cached), assemble."""

    def __init__(
        self,
        store: CorpusStore,
        index: Index,
        config: ScoringConfig | None = None,
        blacklist: BlacklistStore | None = None,
        exclude_own_repository: bool = False,
    ):
        self.config = config or ScoringConfig()
        self.config.validate()
        self.blacklist = blacklist if blacklist is not None else BlacklistStore()
        self.exclude_own_repository = exclude_own_repository
        self.cache = RankCache(self.config.cache_capacity)
        self._snapshot = _Snapshot(store, index)

    @classmethod
    def build(
        cls,
        store: CorpusStore,
        config: ScoringConfig | None = None,
        blacklist: BlacklistStore | None = None,
        exclude_own_repository: bool = False,
    ) -> "Recommender":
        return cls(
            store,
            build_index(store),
            config,
            blacklist,
            exclude_own_repository=exclude_own_repository,
        )

    @property
    def store(self) -> CorpusStore:
        return self._snapshot.store

    @property
    def index(self) -> Index:
        return self._snapshot.index

    def swap_corpus(self, store: CorpusStore, index: Index | None = None) -> None:
        """Publish a new corpus/index pair atomically.

        In-flight readers keep the snapshot they grabbed; the new index
        version makes every previous cache key unreachable.
        """
        self._snapshot = _Snapshot(store, index if index is not None else build_index(store))

    def resolve(self, ref: ReferenceDocument) -> DocumentRecord | None:
        return match_reference(ref, self._snapshot.store)

    def recommend(
        self,
        ref: ReferenceDocument,
        scope: Scope,
        limit: int,
        use_cache: bool = True,
        use_blacklist: bool = True,
        apply_eligibility: bool = True,
        own_repository_id: str | None = None,
        now_year: int | None = None,
    ) -> RecommendOutcome:
        """Produce one recommendation list for one reference and scope.

        Raises EmptyQueryError when the reference yields no term known to
        the index. The matched record itself never appears in the output.
        """
        ref.validate()
        snapshot = self._snapshot
        store, index = snapshot.store, snapshot.index

        matched = match_reference(ref, store)
        reference_key = matched.id if matched is not None else anonymous_reference_key(ref)
        query = query_vector(ref, matched, index)
        if query.is_empty:
            raise EmptyQueryError(
                "reference document has no terms known to the index"
            )
        exclude = frozenset({matched.id}) if matched is not None else frozenset()
        ref_year = matched.year if matched is not None else ref.year

        def compute() -> list:
            return rank(
                query,
                ref_year,
                index,
                store,
                self.config,
                exclude=exclude,
                now_year=now_year,
            )

        if use_cache:
            ranked = cached_rank(
                self.cache,
                reference_key,
                scope.key,
                limit,
                index.index_version,
                compute,
            )
        else:
            ranked = compute()

        if use_blacklist:
            blacklist_check = self.blacklist.check
        else:
            blacklist_check = _never_banned

        exclude_repository_id = None
        if self.exclude_own_repository and scope.kind == "global":
            exclude_repository_id = own_repository_id or (
                matched.repository_id if matched is not None else None
            )

        recommendations = assemble(
            ranked,
            scope,
            limit,
            store,
            blacklist_check,
            reference_key,
            index.index_version,
            exclude_repository_id=exclude_repository_id,
            apply_eligibility=apply_eligibility,
        )
        return RecommendOutcome(
            recommendations=recommendations,
            resolved=matched is not None,
            matched_id=matched.id if matched is not None else None,
            reference_key=reference_key,
        )


def _never_banned(reference_key: str, doc_id: str) -> bool:
    return False


__all__ = ["RecommendOutcome", "Recommender", "anonymous_reference_key"]
