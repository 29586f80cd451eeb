"""Classification accuracy of the matcher against labeled triples."""

from __future__ import annotations

from eskg.corpus.categories import ESCategory
from eskg.corpus.pipeline import Corpus, edge_category_distribution
from eskg.errors import ValidationError
from eskg.kg.model import AbstractKG, TripleText
from eskg.matching.matcher import MatcherConfig, TripleMatcher


def modal_category(distribution: dict[str, float]) -> ESCategory | None:
    if not distribution:
        return None
    return ESCategory(max(sorted(distribution.items()), key=lambda kv: kv[1])[0])


def evaluate_classification(
    labeled: list[tuple[TripleText, ESCategory]],
    abstract: AbstractKG,
    corpus: Corpus | None = None,
    config: MatcherConfig | None = None,
) -> float:
    """Fraction of triples whose matched edge carries the expected modal
    category; an unmatched triple counts as wrong."""
    if not labeled:
        raise ValidationError("empty evaluation set")
    if corpus is not None:
        abstract = edge_category_distribution(corpus, abstract)
    matcher = TripleMatcher(config).fit(abstract)
    hits = 0
    for triple, expected in labeled:
        result = matcher.match(triple)
        if not result.matched or result.best_edge is None:
            continue
        if modal_category(result.best_edge.category_distribution) is expected:
            hits += 1
    return hits / len(labeled)
