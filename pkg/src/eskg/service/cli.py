"""Command-line entry points: serve, kg, corpus, analytics, match."""

from __future__ import annotations

import json
import sys
from dataclasses import replace
from datetime import date as date_type
from pathlib import Path

import click

from eskg.analytics.patterns import mine_order_patterns
from eskg.analytics.stats import relation_stats
from eskg.analytics.tkge import (
    Quadruple,
    TemporalEmbeddingModel,
    TrainingConfig,
    train_temporal_model,
)
from eskg.analytics.walks import anonymize_walk, sample_temporal_walk
from eskg.corpus.agreement import free_marginal_kappa
from eskg.corpus.categories import CATEGORY_COUNT
from eskg.corpus.io import (
    load_corpus,
    read_category_annotations,
    read_drafts,
    read_likert_annotations,
    read_paraphrases,
    save_corpus,
)
from eskg.corpus.pipeline import (
    Corpus,
    CorpusConfig,
    classify_by_majority,
    ingest_paraphrases,
    likert_filter,
)
from eskg.errors import EskgError
from eskg.fixtures import seed_abstract_kg
from eskg.kg.io import load_abstract_kg, load_child_tkg
from eskg.kg.model import TripleText
from eskg.kg.scenarios import derive_scenarios
from eskg.matching.matcher import MatcherConfig, TripleMatcher
from eskg.matching.selection import UsageLog, choose_statement, explain
from eskg.service.config import ApiConfig


def _echo_json(payload):
    click.echo(json.dumps(payload, indent=2, sort_keys=True, default=str))


def _load_corpus_config(path: str | None) -> CorpusConfig:
    if path is None:
        return CorpusConfig()
    return CorpusConfig.from_dict(json.loads(Path(path).read_text()))


@click.group()
def main():
    """Emotional-support knowledge graph toolkit."""


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--dump-openapi", type=click.Path(), default=None, help="Write the OpenAPI document and exit.")
def serve(config_path, dump_openapi):
    """Run the HTTP service."""
    from eskg.service.app import create_app

    config = ApiConfig.load(config_path)
    app = create_app(config)
    if dump_openapi:
        Path(dump_openapi).write_text(json.dumps(app.openapi(), indent=2, sort_keys=True) + "\n")
        click.echo(f"wrote {dump_openapi}")
        return
    import uvicorn

    uvicorn.run(app, host=config.host, port=config.port, log_level="info")


@main.group()
def kg():
    """Abstract-graph utilities."""


@kg.command("load")
@click.argument("path", type=click.Path(exists=True))
def kg_load(path):
    """Load a graph document and print a summary with its scenarios."""
    graph = load_abstract_kg(path)
    scenarios = derive_scenarios(graph)
    _echo_json(
        {
            "entities": len(graph.entities),
            "relations": len(graph.relations),
            "edges": len(graph.edges),
            "negative_edges": len(graph.negative_edges()),
            "scenarios": [s.to_dict() for s in scenarios],
            "version": graph.version,
        }
    )


@kg.command("validate")
@click.argument("path", type=click.Path(exists=True))
def kg_validate(path):
    """Check a graph document; exit non-zero with diagnostics on failure."""
    try:
        graph = load_abstract_kg(path)
    except EskgError as exc:
        click.echo(f"INVALID: {exc}", err=True)
        sys.exit(1)
    click.echo(f"OK: {len(graph.entities)} entities, {len(graph.edges)} edges")


@main.group()
def corpus():
    """Corpus pipeline stages."""


@corpus.command("validate")
@click.option("--drafts", required=True, type=click.Path(exists=True))
@click.option("--ratings", required=True, type=click.Path(exists=True))
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
def corpus_validate(drafts, ratings, config_path):
    """Apply the rating filter to drafts."""
    cfg = _load_corpus_config(config_path)
    result = likert_filter(read_drafts(drafts), read_likert_annotations(ratings), cfg)
    _echo_json(
        {
            "kept": [{"id": rd.draft.id, "mean": rd.mean, "sd": rd.sd} for rd in result.kept],
            "excluded": [
                {"id": ex.draft.id, "reasons": ex.reasons, "mean": ex.mean, "sd": ex.sd}
                for ex in result.excluded
            ],
            "under_annotated": [d.id for d in result.under_annotated],
        }
    )


@corpus.command("classify")
@click.option("--drafts", required=True, type=click.Path(exists=True))
@click.option("--ratings", required=True, type=click.Path(exists=True))
@click.option("--categories", required=True, type=click.Path(exists=True))
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--out", type=click.Path(), default=None, help="Write the corpus document here.")
def corpus_classify(drafts, ratings, categories, config_path, out):
    """Run filter + agreement + majority classification into a corpus."""
    cfg = _load_corpus_config(config_path)
    filtered = likert_filter(read_drafts(drafts), read_likert_annotations(ratings), cfg)
    annotations = read_category_annotations(categories)
    kept_ids = {rd.draft.id for rd in filtered.kept}
    report = free_marginal_kappa(
        [a for a in annotations if a.statement_id in kept_ids], k=CATEGORY_COUNT
    )
    classified = classify_by_majority(filtered.kept, annotations, report, cfg)
    doc = Corpus(statements=classified.validated, config=cfg, report=report)
    if out:
        save_corpus(doc, out)
        click.echo(f"wrote {out} ({len(classified.validated)} statements)", err=True)
    _echo_json(
        {
            "validated": len(classified.validated),
            "excluded": [{"id": ex.draft.id, "reasons": ex.reasons} for ex in classified.excluded]
            + [{"id": ex.draft.id, "reasons": ex.reasons} for ex in filtered.excluded],
            "under_annotated": [d.id for d in filtered.under_annotated],
            "kappa": report.kappa,
        }
    )


@corpus.command("augment")
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True))
@click.option("--paraphrases", required=True, type=click.Path(exists=True))
@click.option("--out", type=click.Path(), default=None)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
def corpus_augment(corpus_path, paraphrases, out, config_path):
    """Add paraphrases as pending statements for expert review."""
    doc = load_corpus(corpus_path)
    items = read_paraphrases(paraphrases)
    ingest_paraphrases(doc, items)
    save_corpus(doc, out or corpus_path)
    _echo_json({"added": len(items), "pending": [s.id for s in doc.pending()]})


@corpus.command("report")
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True))
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
def corpus_report(corpus_path, config_path):
    """Print corpus composition and the embedded agreement report."""
    doc = load_corpus(corpus_path)
    by_category: dict[str, int] = {}
    for s in doc.selectable():
        by_category[s.category.value] = by_category.get(s.category.value, 0) + 1
    _echo_json(
        {
            "statements": len(doc.statements),
            "selectable": len(doc.selectable()),
            "pending": [s.id for s in doc.pending()],
            "by_category": by_category,
            "report": doc.report.to_dict() if doc.report else None,
            "config": doc.config.to_dict(),
        }
    )


@main.group()
def analytics():
    """Temporal analytics over a child graph snapshot or event log."""


@analytics.command("stats")
@click.option("--tkg", "tkg_path", required=True, type=click.Path(exists=True))
@click.option("--relation", required=True)
@click.option("--outlier-threshold", type=float, default=2.0, show_default=True)
def analytics_stats(tkg_path, relation, outlier_threshold):
    tkg = load_child_tkg(tkg_path)
    _echo_json(relation_stats(tkg, relation, outlier_threshold).to_dict())


@analytics.command("patterns")
@click.option("--tkg", "tkg_path", required=True, type=click.Path(exists=True))
@click.option("--max-lag-days", type=float, default=7.0, show_default=True)
@click.option("--min-support", type=int, default=1, show_default=True)
def analytics_patterns(tkg_path, max_lag_days, min_support):
    tkg = load_child_tkg(tkg_path)
    _echo_json([p.to_dict() for p in mine_order_patterns(tkg, max_lag_days, min_support)])


@analytics.command("train")
@click.option("--tkg", "tkg_path", required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
@click.option("--dim", type=int, default=32, show_default=True)
@click.option("--epochs", type=int, default=150, show_default=True)
@click.option("--learning-rate", type=float, default=0.05, show_default=True)
@click.option("--margin", type=float, default=1.0, show_default=True)
@click.option("--negatives", type=int, default=2, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
def analytics_train(tkg_path, out, dim, epochs, learning_rate, margin, negatives, seed):
    tkg = load_child_tkg(tkg_path)
    cfg = TrainingConfig(
        dim=dim, epochs=epochs, learning_rate=learning_rate, margin=margin,
        negatives=negatives, seed=seed,
    )
    model = train_temporal_model(tkg, cfg)
    model.save(out)
    _echo_json(
        {
            "model": out,
            "entities": len(model.entity_index),
            "relations": len(model.relation_index),
            "initial_loss": model.loss_history[0],
            "final_loss": model.loss_history[-1],
        }
    )


@analytics.command("predict")
@click.option("--model", "model_path", required=True, type=click.Path(exists=True))
@click.option("--subject", required=True)
@click.option("--relation", required=True)
@click.option("--object", "object_", required=True)
@click.option("--date", "day", required=True, help="YYYY-MM-DD")
def analytics_predict(model_path, subject, relation, object_, day):
    model = TemporalEmbeddingModel.load(model_path)
    quad = Quadruple(subject, relation, object_, date_type.fromisoformat(day))
    _echo_json(
        {
            "quadruple": quad.to_dict(),
            "plausibility": model.plausibility(quad),
            "distance": model.distance(quad),
            "note": "model plausibility, not calibrated probability",
        }
    )


@analytics.command("walk")
@click.option("--tkg", "tkg_path", required=True, type=click.Path(exists=True))
@click.option("--start", required=True)
@click.option("--max-steps", type=int, default=10, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--anonymize", is_flag=True, default=False)
def analytics_walk(tkg_path, start, max_steps, seed, anonymize):
    tkg = load_child_tkg(tkg_path)
    walk = sample_temporal_walk(tkg, start, max_steps, seed)
    if anonymize:
        walk = anonymize_walk(walk, seed=seed)
    _echo_json(walk.to_dict())


@main.command()
@click.option("--subject", required=True)
@click.option("--relation", required=True)
@click.option("--object", "object_", required=True)
@click.option("--kg", "kg_path", type=click.Path(exists=True), default=None,
              help="Abstract graph document; packaged seed graph when omitted.")
@click.option("--corpus", "corpus_path", type=click.Path(exists=True), default=None)
@click.option("--threshold", type=float, default=None)
@click.option("--seed", type=int, default=0, show_default=True)
def match(subject, relation, object_, kg_path, corpus_path, threshold, seed):
    """Match one triple against the abstract graph and print the result with
    its justification as JSON."""
    graph = load_abstract_kg(kg_path) if kg_path else seed_abstract_kg()
    config = MatcherConfig() if threshold is None else MatcherConfig(threshold=threshold)
    doc = None
    if corpus_path:
        doc = load_corpus(corpus_path)
    else:
        from eskg.fixtures import seed_corpus

        doc = seed_corpus()
    from eskg.corpus.pipeline import edge_category_distribution

    scored = edge_category_distribution(doc, graph)
    matcher = TripleMatcher(config).fit(scored)
    result = matcher.match(TripleText(subject, relation, object_))
    statement = None
    if result.matched:
        statement = choose_statement(result, doc, UsageLog("cli"), seed, config)
    _echo_json(
        {
            "match": result.to_dict(),
            "statement": statement.to_dict() if statement else None,
            "justification": explain(result, statement).to_dict() if statement else None,
        }
    )


if __name__ == "__main__":
    main()
