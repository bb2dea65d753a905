"""Evaluation harness: citation ground truths, ranking metrics, CTR, A/B.

Offline quality rests on two proxies for relevance: direct citation links
(each edge makes both endpoints correct answers for each other) and
co-citation counts above a threshold. Online quality is click-through rate
over the interaction log, compared across A/B arms with a one-sided pooled
two-proportion z-test.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable

from .corpus import ReferenceDocument
from .engine import Recommender
from .errors import EmptyQueryError, ValidationError
from .feedback import InteractionEvent
from .pipeline import Scope

GroundTruth = dict[str, set[str]]

CTR_GROUP_KEYS = ("item", "list", "variant")

UNLABELED_GROUP = "(none)"


@dataclass
class CitationGraph:
    """Directed citing -> cited edges; self-citations are invalid."""

    edges: set[tuple[str, str]]

    def __post_init__(self) -> None:
        for citing, cited in self.edges:
            if not citing or not cited:
                raise ValidationError("citation edge ids must be non-empty")
            if citing == cited:
                raise ValidationError(f"self-edge on {citing!r} is not allowed")

    def __len__(self) -> int:
        return len(self.edges)


def load_citation_graph(path: str | Path) -> tuple[CitationGraph, int]:
    """Read a `citing_id,cited_id` CSV; bad rows are skipped and counted."""
    edges: set[tuple[str, str]] = set()
    skipped = 0
    with open(path, "r", encoding="utf-8", newline="") as handle:
        reader = csv.DictReader(handle)
        for row in reader:
            citing = (row.get("citing_id") or "").strip()
            cited = (row.get("cited_id") or "").strip()
            if not citing or not cited or citing == cited:
                skipped += 1
                continue
            edges.add((citing, cited))
    return CitationGraph(edges), skipped


def build_citation_gt(graph: CitationGraph) -> GroundTruth:
    """Symmetric closure of the edge set: cites and cited-by both count."""
    gt: GroundTruth = {}
    for citing, cited in graph.edges:
        gt.setdefault(citing, set()).add(cited)
        gt.setdefault(cited, set()).add(citing)
    return gt


def build_cocitation_gt(graph: CitationGraph, threshold: int = 2) -> GroundTruth:
    """Pairs co-cited by at least `threshold` papers are mutually relevant."""
    if threshold < 1:
        raise ValidationError(f"threshold must be >= 1, got {threshold}")
    outgoing: dict[str, set[str]] = {}
    for citing, cited in graph.edges:
        outgoing.setdefault(citing, set()).add(cited)
    pair_counts: dict[tuple[str, str], int] = {}
    for cited_set in outgoing.values():
        members = sorted(cited_set)
        for i, first in enumerate(members):
            for second in members[i + 1 :]:
                pair_counts[(first, second)] = pair_counts.get((first, second), 0) + 1
    gt: GroundTruth = {}
    for (first, second), count in pair_counts.items():
        if count >= threshold:
            gt.setdefault(first, set()).add(second)
            gt.setdefault(second, set()).add(first)
    return gt


def precision_at_k(ranked: list[str], relevant: set[str], k: int) -> float:
    """Hits in the top k over k; the denominator stays k even when fewer
    results were returned."""
    if k < 1:
        raise ValidationError(f"k must be >= 1, got {k}")
    hits = sum(1 for doc_id in ranked[:k] if doc_id in relevant)
    return hits / k


def recall_at_k(ranked: list[str], relevant: set[str], k: int) -> float:
    if k < 1:
        raise ValidationError(f"k must be >= 1, got {k}")
    if not relevant:
        raise ValidationError("recall needs a non-empty relevant set")
    hits = sum(1 for doc_id in ranked[:k] if doc_id in relevant)
    return hits / len(relevant)


def average_precision(ranked: list[str], relevant: set[str]) -> float:
    """Mean of precision at each relevant hit, over all relevant documents."""
    if not relevant:
        raise ValidationError("average precision needs a non-empty relevant set")
    hits = 0
    total = 0.0
    for position, doc_id in enumerate(ranked, start=1):
        if doc_id in relevant:
            hits += 1
            total += hits / position
    return total / len(relevant)


def ndcg_at_k(ranked: list[str], relevant: set[str], k: int) -> float:
    """Binary-gain NDCG; zero when there is nothing relevant to find."""
    if k < 1:
        raise ValidationError(f"k must be >= 1, got {k}")
    if not relevant:
        return 0.0
    dcg = 0.0
    for position, doc_id in enumerate(ranked[:k], start=1):
        if doc_id in relevant:
            dcg += 1.0 / math.log2(position + 1)
    ideal_hits = min(k, len(relevant))
    idcg = sum(1.0 / math.log2(position + 1) for position in range(1, ideal_hits + 1))
    if idcg == 0.0:
        return 0.0
    return dcg / idcg


@dataclass
class QueryEval:
    query_id: str
    retrieved: int
    average_precision: float
    precision: dict[int, float]
    recall: dict[int, float]
    ndcg: dict[int, float]

    def to_obj(self) -> dict[str, Any]:
        return {
            "query_id": self.query_id,
            "retrieved": self.retrieved,
            "average_precision": self.average_precision,
            "precision": {str(k): v for k, v in self.precision.items()},
            "recall": {str(k): v for k, v in self.recall.items()},
            "ndcg": {str(k): v for k, v in self.ndcg.items()},
        }


@dataclass
class EvalReport:
    ks: list[int]
    config_fingerprint: str
    query_count: int = 0
    skipped_queries: int = 0
    empty_relevant: int = 0
    unresolvable_relevant: int = 0
    empty_query_vectors: int = 0
    per_query: list[QueryEval] = field(default_factory=list)
    mean_average_precision: float = 0.0
    mean_precision: dict[int, float] = field(default_factory=dict)
    mean_recall: dict[int, float] = field(default_factory=dict)
    mean_ndcg: dict[int, float] = field(default_factory=dict)

    def to_obj(self) -> dict[str, Any]:
        return {
            "ks": self.ks,
            "config_fingerprint": self.config_fingerprint,
            "query_count": self.query_count,
            "skipped_queries": self.skipped_queries,
            "empty_relevant": self.empty_relevant,
            "unresolvable_relevant": self.unresolvable_relevant,
            "empty_query_vectors": self.empty_query_vectors,
            "mean_average_precision": self.mean_average_precision,
            "mean_precision": {str(k): v for k, v in self.mean_precision.items()},
            "mean_recall": {str(k): v for k, v in self.mean_recall.items()},
            "mean_ndcg": {str(k): v for k, v in self.mean_ndcg.items()},
            "per_query": [row.to_obj() for row in self.per_query],
        }

    def write_csv(self, path: str | Path) -> None:
        """Flat per-query rows for spreadsheet parameter sweeps."""
        columns = ["query_id", "retrieved", "average_precision"]
        for k in self.ks:
            columns += [f"precision@{k}", f"recall@{k}", f"ndcg@{k}"]
        with open(path, "w", encoding="utf-8", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(columns)
            for row in self.per_query:
                values: list[Any] = [row.query_id, row.retrieved, row.average_precision]
                for k in self.ks:
                    values += [row.precision[k], row.recall[k], row.ndcg[k]]
                writer.writerow(values)


def run_offline_eval(
    recommender: Recommender,
    gt: GroundTruth,
    ks: Iterable[int],
    apply_eligibility: bool = False,
    use_cache: bool = False,
) -> EvalReport:
    """Score the recommender against a ground truth, global scope.

    Each ground-truth query is recommended top-max(ks) with the blacklist
    disabled; queries that do not resolve in the corpus, or whose relevant
    set is empty after dropping unresolvable ids, are skipped and counted.
    """
    ks = sorted(set(int(k) for k in ks))
    if not ks or ks[0] < 1:
        raise ValidationError("ks must contain positive integers")
    depth = max(ks)
    report = EvalReport(ks=ks, config_fingerprint=recommender.config.fingerprint())
    store = recommender.store

    ap_values: list[float] = []
    metric_sums: dict[str, dict[int, float]] = {
        "precision": {k: 0.0 for k in ks},
        "recall": {k: 0.0 for k in ks},
        "ndcg": {k: 0.0 for k in ks},
    }

    for query_id in sorted(gt):
        if store.get(query_id) is None:
            report.skipped_queries += 1
            continue
        relevant = {doc_id for doc_id in gt[query_id] if doc_id != query_id}
        resolvable = {doc_id for doc_id in relevant if doc_id in store}
        report.unresolvable_relevant += len(relevant) - len(resolvable)
        if not resolvable:
            report.empty_relevant += 1
            continue
        try:
            outcome = recommender.recommend(
                ReferenceDocument(id=query_id),
                Scope.global_scope(),
                limit=depth,
                use_cache=use_cache,
                use_blacklist=False,
                apply_eligibility=apply_eligibility,
            )
        except EmptyQueryError:
            report.empty_query_vectors += 1
            continue
        ranked = [item.doc_id for item in outcome.recommendations.items]

        row = QueryEval(
            query_id=query_id,
            retrieved=len(ranked),
            average_precision=average_precision(ranked, resolvable),
            precision={k: precision_at_k(ranked, resolvable, k) for k in ks},
            recall={k: recall_at_k(ranked, resolvable, k) for k in ks},
            ndcg={k: ndcg_at_k(ranked, resolvable, k) for k in ks},
        )
        report.per_query.append(row)
        ap_values.append(row.average_precision)
        for k in ks:
            metric_sums["precision"][k] += row.precision[k]
            metric_sums["recall"][k] += row.recall[k]
            metric_sums["ndcg"][k] += row.ndcg[k]

    report.query_count = len(report.per_query)
    if report.query_count:
        report.mean_average_precision = sum(ap_values) / report.query_count
        report.mean_precision = {
            k: metric_sums["precision"][k] / report.query_count for k in ks
        }
        report.mean_recall = {
            k: metric_sums["recall"][k] / report.query_count for k in ks
        }
        report.mean_ndcg = {k: metric_sums["ndcg"][k] / report.query_count for k in ks}
    else:
        report.mean_precision = {k: 0.0 for k in ks}
        report.mean_recall = {k: 0.0 for k in ks}
        report.mean_ndcg = {k: 0.0 for k in ks}
    return report


@dataclass
class CtrGroup:
    impressions: int = 0
    clicks: int = 0
    orphan_clicks: int = 0

    @property
    def ctr(self) -> float | None:
        if self.impressions == 0:
            return None
        return self.clicks / self.impressions

    def to_obj(self) -> dict[str, Any]:
        return {
            "impressions": self.impressions,
            "clicks": self.clicks,
            "orphan_clicks": self.orphan_clicks,
            "ctr": self.ctr,
        }


@dataclass
class CtrReport:
    group_by: str
    groups: dict[str, CtrGroup] = field(default_factory=dict)
    orphan_clicks: int = 0

    def to_obj(self) -> dict[str, Any]:
        return {
            "group_by": self.group_by,
            "orphan_clicks": self.orphan_clicks,
            "groups": {key: group.to_obj() for key, group in sorted(self.groups.items())},
        }


def compute_ctr(events: Iterable[InteractionEvent], group_by: str = "item") -> CtrReport:
    """Clicks over impressions per group; orphan clicks never count.

    Groups with zero impressions report an undefined rate (None), not zero.
    """
    if group_by not in CTR_GROUP_KEYS:
        raise ValidationError(
            f"group_by must be one of {CTR_GROUP_KEYS}, got {group_by!r}",
            field="group_by",
        )
    report = CtrReport(group_by=group_by)
    for event in events:
        if group_by == "item":
            key = event.doc_id
        elif group_by == "list":
            key = event.source_doc_id or UNLABELED_GROUP
        else:
            key = event.variant or UNLABELED_GROUP
        group = report.groups.setdefault(key, CtrGroup())
        if event.kind == "impression":
            group.impressions += 1
        elif event.orphan:
            group.orphan_clicks += 1
            report.orphan_clicks += 1
        else:
            group.clicks += 1
    return report


@dataclass
class ABTestResult:
    ctr_a: float
    ctr_b: float
    z: float
    p_value: float
    alpha: float
    significant: bool

    def to_obj(self) -> dict[str, Any]:
        return {
            "ctr_a": self.ctr_a,
            "ctr_b": self.ctr_b,
            "z": self.z,
            "p_value": self.p_value,
            "alpha": self.alpha,
            "significant": self.significant,
        }


def ab_significance(
    clicks_a: int,
    imps_a: int,
    clicks_b: int,
    imps_b: int,
    alpha: float = 0.05,
) -> ABTestResult:
    """Pooled two-proportion z-test, one-sided alternative CTR_b > CTR_a.

    Significant means the B arm's rate is larger than chance would allow at
    the given level, so promoting the B configuration is defensible.
    """
    if imps_a < 1 or imps_b < 1:
        raise ValidationError("each arm needs at least one impression")
    if clicks_a < 0 or clicks_b < 0:
        raise ValidationError("click counts must be >= 0")
    if clicks_a > imps_a or clicks_b > imps_b:
        raise ValidationError("clicks cannot exceed impressions")
    if not 0.0 < alpha < 1.0:
        raise ValidationError("alpha must be in (0, 1)")
    rate_a = clicks_a / imps_a
    rate_b = clicks_b / imps_b
    pooled = (clicks_a + clicks_b) / (imps_a + imps_b)
    se = math.sqrt(pooled * (1.0 - pooled) * (1.0 / imps_a + 1.0 / imps_b))
    z = 0.0 if se == 0.0 else (rate_b - rate_a) / se
    p_value = 0.5 * math.erfc(z / math.sqrt(2.0))
    return ABTestResult(
        ctr_a=rate_a,
        ctr_b=rate_b,
        z=z,
        p_value=p_value,
        alpha=alpha,
        significant=p_value < alpha,
    )


__all__ = [
    "ABTestResult",
    "CitationGraph",
    "CtrGroup",
    "CtrReport",
    "EvalReport",
    "GroundTruth",
    "QueryEval",
    "ab_significance",
    "average_precision",
    "build_citation_gt",
    "build_cocitation_gt",
    "compute_ctr",
    "load_citation_graph",
    "ndcg_at_k",
    "precision_at_k",
    "recall_at_k",
    "run_offline_eval",
]
