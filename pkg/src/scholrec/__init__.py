"""scholrec: content-based scholarly article recommendation engine."""

__version__ = "0.1.0"

from .corpus import (
    CorpusStore,
    DocumentRecord,
    ReferenceDocument,
    load_corpus,
    match_reference,
    normalize_title,
)
from .engine import Recommender
from .index import Index, build_index, tokenize
from .pipeline import RecommendationList, Scope
from .scorer import ScoringConfig

__all__ = [
    "CorpusStore",
    "DocumentRecord",
    "Index",
    "Recommender",
    "RecommendationList",
    "ReferenceDocument",
    "Scope",
    "ScoringConfig",
    "__version__",
    "build_index",
    "load_corpus",
    "match_reference",
    "normalize_title",
    "tokenize",
]
