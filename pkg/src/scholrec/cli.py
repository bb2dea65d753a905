"""Command-line entry points for the whole toolchain.

Exit codes: 0 success, 1 validation error, 2 I/O error.
"""

from __future__ import annotations

import json
import sys
import uuid

import click

from .config import AppConfig, load_app_config
from .corpus import ReferenceDocument, load_corpus
from .engine import Recommender
from .enrich import enrich_store, join_indicators, read_indicators
from .errors import EmptyQueryError, ValidationError
from .evaluation import (
    ab_significance,
    build_citation_gt,
    build_cocitation_gt,
    compute_ctr,
    load_citation_graph,
    run_offline_eval,
)
from .feedback import load_events
from .index import build_index, save_snapshot
from .pipeline import Scope


def _echo_json(obj) -> None:
    click.echo(json.dumps(obj, indent=2, ensure_ascii=False))


def _load_config(config_path: str | None) -> AppConfig:
    return load_app_config(config_path)


def _build_engine(
    corpus_path: str,
    config: AppConfig,
    indicators_path: str | None = None,
) -> Recommender:
    store, _report = load_corpus(corpus_path)
    store = enrich_store(store)
    if indicators_path:
        rows, _skipped = read_indicators(indicators_path)
        store, _join = join_indicators(store, rows)
    return Recommender.build(
        store,
        config.scoring,
        exclude_own_repository=config.exclude_own_repository,
    )


@click.group()
def cli() -> None:
    """Content-based scholarly article recommender."""


@cli.command()
@click.option("--corpus", "corpus_path", required=True, type=click.Path(), help="JSONL corpus file")
def ingest(corpus_path: str) -> None:
    """Validate a corpus file and report load counters."""
    store, report = load_corpus(corpus_path)
    _echo_json(
        {
            "documents": len(store),
            "loaded": report.loaded,
            "skipped": report.skipped,
            "unknown_fields": report.unknown_fields,
            "errors": report.errors,
        }
    )


@cli.command()
@click.option("--corpus", "corpus_path", required=True, type=click.Path())
@click.option("--indicators", "indicators_path", type=click.Path(), default=None)
@click.option("--key-terms", "key_terms", type=int, default=0, help="extract top-K key terms per record")
@click.option("--out", "out_path", required=True, type=click.Path())
def enrich(corpus_path: str, indicators_path: str | None, key_terms: int, out_path: str) -> None:
    """Infer languages/key terms, join indicators, write the enriched corpus."""
    store, _report = load_corpus(corpus_path)
    store = enrich_store(store, key_term_count=key_terms or None)
    summary: dict = {"documents": len(store)}
    if indicators_path:
        rows, skipped = read_indicators(indicators_path)
        store, join_report = join_indicators(store, rows)
        summary["indicators"] = {
            "matched": join_report.matched,
            "unmatched": join_report.unmatched,
            "rejected": join_report.rejected,
            "skipped_rows": skipped,
        }
    store.write_jsonl(out_path)
    summary["out"] = out_path
    _echo_json(summary)


@cli.command(name="index")
@click.option("--corpus", "corpus_path", required=True, type=click.Path())
@click.option("--snapshot", "snapshot_path", type=click.Path(), default=None)
def index_command(corpus_path: str, snapshot_path: str | None) -> None:
    """Build the fielded TF-IDF index, optionally saving a snapshot."""
    store, _report = load_corpus(corpus_path)
    store = enrich_store(store)
    index = build_index(store)
    if snapshot_path:
        save_snapshot(index, snapshot_path)
    _echo_json(
        {
            "documents": index.doc_count,
            "index_version": index.index_version,
            "terms": {field: len(terms) for field, terms in index.df.items()},
            "snapshot": snapshot_path,
        }
    )


@cli.command()
@click.option("--corpus", "corpus_path", required=True, type=click.Path())
@click.option("--indicators", "indicators_path", type=click.Path(), default=None)
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--id", "doc_id", default=None, help="reference document id")
@click.option("--doi", default=None)
@click.option("--title", default=None)
@click.option("--abstract", default=None)
@click.option("--year", type=int, default=None)
@click.option("--scope", type=click.Choice(["global", "repository"]), default="global")
@click.option("--repository-id", "repository_id", default=None)
@click.option("--limit", type=click.IntRange(1, 50), default=5)
def recommend(
    corpus_path: str,
    indicators_path: str | None,
    config_path: str | None,
    doc_id: str | None,
    doi: str | None,
    title: str | None,
    abstract: str | None,
    year: int | None,
    scope: str,
    repository_id: str | None,
    limit: int,
) -> None:
    """Print recommendations for a reference document as JSON."""
    config = _load_config(config_path)
    engine = _build_engine(corpus_path, config, indicators_path)
    ref = ReferenceDocument(id=doc_id, doi=doi, title=title, abstract=abstract, year=year)
    scope_obj = Scope.repository(repository_id or "") if scope == "repository" else Scope.global_scope()
    outcome = engine.recommend(ref, scope_obj, limit, own_repository_id=repository_id)
    _echo_json(
        {
            "items": [item.to_obj() for item in outcome.recommendations.items],
            "reference_resolved": outcome.resolved,
            "reference_key": outcome.reference_key,
            "index_version": outcome.recommendations.index_version,
            "request_id": uuid.uuid4().hex,
        }
    )


@cli.command()
@click.option("--corpus", "corpus_path", required=True, type=click.Path())
@click.option("--citations", "citations_path", required=True, type=click.Path())
@click.option("--gt", "gt_kind", type=click.Choice(["citation", "cocitation"]), default="citation")
@click.option("--cocite-threshold", "cocite_threshold", type=int, default=2)
@click.option("--k", "ks", default="1,5,10", help="comma-separated cutoffs")
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--csv", "csv_path", type=click.Path(), default=None, help="write per-query rows as CSV")
@click.option("--apply-eligibility", is_flag=True, default=False)
def evaluate(
    corpus_path: str,
    citations_path: str,
    gt_kind: str,
    cocite_threshold: int,
    ks: str,
    config_path: str | None,
    csv_path: str | None,
    apply_eligibility: bool,
) -> None:
    """Run the offline evaluation and print the report as JSON."""
    try:
        cutoffs = [int(part) for part in ks.split(",") if part.strip()]
    except ValueError as exc:
        raise ValidationError(f"--k must be comma-separated integers: {exc}") from exc
    config = _load_config(config_path)
    engine = _build_engine(corpus_path, config)
    graph, _skipped = load_citation_graph(citations_path)
    if gt_kind == "citation":
        gt = build_citation_gt(graph)
    else:
        gt = build_cocitation_gt(graph, cocite_threshold)
    report = run_offline_eval(engine, gt, cutoffs, apply_eligibility=apply_eligibility)
    if csv_path:
        report.write_csv(csv_path)
    _echo_json(report.to_obj())


@cli.command()
@click.option("--events", "events_path", required=True, type=click.Path())
@click.option("--group-by", "group_by", type=click.Choice(["item", "list", "variant"]), default="item")
def ctr(events_path: str, group_by: str) -> None:
    """Compute click-through rates from an event log."""
    _echo_json(compute_ctr(load_events(events_path), group_by).to_obj())


def _parse_arm(value: str, name: str) -> tuple[int, int]:
    parts = value.split("/")
    if len(parts) != 2:
        raise ValidationError(f"--{name} must look like clicks/impressions, got {value!r}")
    try:
        clicks, impressions = int(parts[0]), int(parts[1])
    except ValueError as exc:
        raise ValidationError(f"--{name} must be integers: {value!r}") from exc
    return clicks, impressions


@cli.command()
@click.option("--a", "arm_a", required=True, help="control arm as clicks/impressions")
@click.option("--b", "arm_b", required=True, help="candidate arm as clicks/impressions")
@click.option("--alpha", type=float, default=0.05)
def abtest(arm_a: str, arm_b: str, alpha: float) -> None:
    """One-sided two-proportion z-test on CTRs (is B better than A?)."""
    clicks_a, imps_a = _parse_arm(arm_a, "a")
    clicks_b, imps_b = _parse_arm(arm_b, "b")
    result = ab_significance(clicks_a, imps_a, clicks_b, imps_b, alpha)
    _echo_json(result.to_obj())


@cli.command()
@click.option("--corpus", "corpus_path", type=click.Path(), default=None)
@click.option("--indicators", "indicators_path", type=click.Path(), default=None)
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--port", type=int, default=None)
@click.option("--log-level", "log_level", default=None)
@click.option("--feedback-log", "feedback_log", type=click.Path(), default=None)
@click.option("--event-log", "event_log", type=click.Path(), default=None)
def serve(
    corpus_path: str | None,
    indicators_path: str | None,
    config_path: str | None,
    port: int | None,
    log_level: str | None,
    feedback_log: str | None,
    event_log: str | None,
) -> None:
    """Load the corpus and serve the /v1 HTTP API."""
    import uvicorn

    from .service import build_state, create_app

    config = _load_config(config_path)
    if corpus_path:
        config.corpus = corpus_path
    if indicators_path:
        config.indicators = indicators_path
    if port is not None:
        config.port = port
    if log_level:
        config.log_level = log_level
    if feedback_log:
        config.feedback_log = feedback_log
    if event_log:
        config.event_log = event_log
    if not config.corpus:
        raise ValidationError("either --corpus or a config corpus path is required")

    state = build_state(config)
    app = create_app(state)
    click.echo(
        f"serving {len(state.engine.store)} documents on port {config.port}", err=True
    )
    uvicorn.run(app, host="127.0.0.1", port=config.port, log_level=config.log_level)


def main(argv: list[str] | None = None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.exceptions.Exit as exc:
        return int(exc.exit_code)
    except click.Abort:
        return 130
    except click.ClickException as exc:
        exc.show()
        return 1
    except (ValidationError, EmptyQueryError) as exc:
        click.echo(f"error: {exc}", err=True)
        return 1
    except OSError as exc:
        click.echo(f"I/O error: {exc}", err=True)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
