import pytest

from eskg.corpus.categories import ESCategory
from eskg.errors import ValidationError
from eskg.kg.model import AbstractKG, TripleText
from eskg.matching.evaluation import evaluate_classification, modal_category
from eskg.matching.matcher import TripleMatcher


def scenario_truth(abstract, corpus):
    """Each scenario edge's own labels paired with its modal category."""
    from eskg.corpus.pipeline import edge_category_distribution

    scored = edge_category_distribution(corpus, abstract)
    pairs = []
    for edge in scored.edges:
        if edge.scenario_id is None or not edge.category_distribution:
            continue
        pairs.append((scored.edge_text(edge), modal_category(edge.category_distribution)))
    return pairs


def test_self_consistency_is_perfect(abstract, corpus):
    pairs = scenario_truth(abstract, corpus)
    assert len(pairs) == 8
    assert evaluate_classification(pairs, abstract, corpus) == 1.0


def test_unmatched_counts_as_wrong(abstract, corpus):
    pairs = [(TripleText("robot", "beeps at", "moon"), ESCategory.EMP)] * 4
    assert evaluate_classification(pairs, abstract, corpus) == 0.0


def test_empty_test_set_rejected(abstract, corpus):
    with pytest.raises(ValidationError):
        evaluate_classification([], abstract, corpus)


def test_empty_abstract_graph_rejected(corpus):
    with pytest.raises(ValidationError):
        evaluate_classification(
            [(TripleText("a", "b", "c"), ESCategory.EMP)], AbstractKG(), corpus
        )


def test_modal_category_tie_breaks_to_smaller_code():
    assert modal_category({"SUP": 0.5, "APP": 0.5}) is ESCategory.APP
    assert modal_category({}) is None
