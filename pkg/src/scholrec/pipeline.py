"""Post-filtering: turn a ranked candidate pool into recommendation lists.

Stages run in a fixed order: scope, eligibility, blacklist, dedup,
truncate. Cheapest checks come first and truncation is last so it can
never hide a later removal. Per-stage drop counts are kept for
observability; they always sum to the difference between input and output
sizes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Any, Callable, Sequence

from .corpus import CorpusStore, DocumentRecord, normalize_title
from .errors import ValidationError
from .scorer import ScoredCandidate

NO_FULLTEXT = "NO_FULLTEXT"
NO_THUMBNAIL = "NO_THUMBNAIL"
INCOMPLETE_METADATA = "INCOMPLETE_METADATA"

GLOBAL_SCOPE = "global"
REPOSITORY_SCOPE = "repository"


@dataclass(frozen=True)
class Scope:
    """Recommendation scope: all repositories, or one repository's holdings."""

    kind: str
    repository_id: str | None = None

    def __post_init__(self) -> None:
        if self.kind not in (GLOBAL_SCOPE, REPOSITORY_SCOPE):
            raise ValidationError(f"unknown scope kind {self.kind!r}", field="scope")
        if self.kind == REPOSITORY_SCOPE and not self.repository_id:
            raise ValidationError(
                "repository scope needs a repository_id", field="repository_id"
            )

    @classmethod
    def global_scope(cls) -> "Scope":
        return cls(GLOBAL_SCOPE)

    @classmethod
    def repository(cls, repository_id: str) -> "Scope":
        return cls(REPOSITORY_SCOPE, repository_id)

    @property
    def key(self) -> str:
        if self.kind == GLOBAL_SCOPE:
            return GLOBAL_SCOPE
        return f"{REPOSITORY_SCOPE}:{self.repository_id}"


def eligible(record: DocumentRecord) -> tuple[bool, str | None]:
    """Recommendability check, returning the first failing reason code.

    A record qualifies when it has open-access fulltext, a generated
    thumbnail, and the minimal metadata set: title, at least one author,
    abstract and publication year.
    """
    if not record.has_fulltext:
        return False, NO_FULLTEXT
    if not record.has_thumbnail:
        return False, NO_THUMBNAIL
    if (
        not record.title.strip()
        or not record.authors
        or not record.abstract.strip()
        or record.year is None
    ):
        return False, INCOMPLETE_METADATA
    return True, None


@dataclass
class RecommendationItem:
    doc_id: str
    final_score: float
    title: str
    authors: list[str]
    year: int | None
    repository_id: str
    doi: str | None = None

    def dedup_key(self) -> tuple[str, str]:
        first_author = self.authors[0] if self.authors else ""
        return (normalize_title(self.title), normalize_title(first_author))

    def to_obj(self) -> dict[str, Any]:
        obj: dict[str, Any] = {
            "id": self.doc_id,
            "title": self.title,
            "authors": list(self.authors),
            "year": self.year,
            "repository_id": self.repository_id,
            "score": self.final_score,
        }
        if self.doi is not None:
            obj["doi"] = self.doi
        return obj


@dataclass
class StageCounts:
    """How many candidates each pipeline stage removed."""

    scope: int = 0
    ineligible: int = 0
    blacklisted: int = 0
    duplicate: int = 0
    truncated: int = 0

    def total(self) -> int:
        return self.scope + self.ineligible + self.blacklisted + self.duplicate + self.truncated

    def to_obj(self) -> dict[str, int]:
        return {
            "scope": self.scope,
            "ineligible": self.ineligible,
            "blacklisted": self.blacklisted,
            "duplicate": self.duplicate,
            "truncated": self.truncated,
        }


@dataclass
class RecommendationList:
    reference_key: str
    scope: Scope
    items: list[RecommendationItem]
    generated_at: str
    index_version: int
    drops: StageCounts = field(default_factory=StageCounts)

    def to_obj(self) -> dict[str, Any]:
        return {
            "reference_key": self.reference_key,
            "scope": self.scope.key,
            "items": [item.to_obj() for item in self.items],
            "generated_at": self.generated_at,
            "index_version": self.index_version,
            "drops": self.drops.to_obj(),
        }


def dedup(items: Sequence[RecommendationItem]) -> list[RecommendationItem]:
    """Keep the first (highest-scored) item per duplicate key.

    The key is the normalized title plus normalized first author, which
    catches the same work aggregated from many repositories. Single stable
    pass; survivor order is preserved.
    """
    seen: set[tuple[str, str]] = set()
    survivors: list[RecommendationItem] = []
    for item in items:
        key = item.dedup_key()
        if key in seen:
            continue
        seen.add(key)
        survivors.append(item)
    return survivors


def assemble(
    ranked: Sequence[ScoredCandidate],
    scope: Scope,
    limit: int,
    store: CorpusStore,
    blacklist_check: Callable[[str, str], bool],
    reference_key: str,
    index_version: int,
    exclude_repository_id: str | None = None,
    apply_eligibility: bool = True,
    generated_at: str | None = None,
) -> RecommendationList:
    """Filter a ranked pool into one recommendation list for one scope.

    ``exclude_repository_id`` optionally removes the reference's own
    repository from the global tab; by default the global tab keeps it.
    ``apply_eligibility`` exists for the offline evaluation harness, which
    may score corpora that carry no thumbnails or fulltext.
    """
    if limit < 1:
        raise ValidationError("limit must be >= 1", field="limit")
    drops = StageCounts()

    in_scope: list[tuple[ScoredCandidate, DocumentRecord]] = []
    for candidate in ranked:
        record = store.get(candidate.doc_id)
        if record is None:
            drops.ineligible += 1
            continue
        if scope.kind == REPOSITORY_SCOPE:
            if record.repository_id != scope.repository_id:
                drops.scope += 1
                continue
        elif exclude_repository_id and record.repository_id == exclude_repository_id:
            drops.scope += 1
            continue
        in_scope.append((candidate, record))

    qualified: list[tuple[ScoredCandidate, DocumentRecord]] = []
    for candidate, record in in_scope:
        if apply_eligibility:
            ok, _reason = eligible(record)
            if not ok:
                drops.ineligible += 1
                continue
        qualified.append((candidate, record))

    allowed: list[RecommendationItem] = []
    for candidate, record in qualified:
        if blacklist_check(reference_key, candidate.doc_id):
            drops.blacklisted += 1
            continue
        allowed.append(
            RecommendationItem(
                doc_id=record.id,
                final_score=candidate.final_score,
                title=record.title,
                authors=list(record.authors),
                year=record.year,
                repository_id=record.repository_id,
                doi=record.doi,
            )
        )

    unique = dedup(allowed)
    drops.duplicate += len(allowed) - len(unique)

    items = unique[:limit]
    drops.truncated += len(unique) - len(items)

    return RecommendationList(
        reference_key=reference_key,
        scope=scope,
        items=items,
        generated_at=generated_at
        or datetime.now(timezone.utc).isoformat(timespec="seconds"),
        index_version=index_version,
        drops=drops,
    )


__all__ = [
    "INCOMPLETE_METADATA",
    "NO_FULLTEXT",
    "NO_THUMBNAIL",
    "RecommendationItem",
    "RecommendationList",
    "Scope",
    "StageCounts",
    "assemble",
    "dedup",
    "eligible",
]
