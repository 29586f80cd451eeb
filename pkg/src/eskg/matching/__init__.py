from eskg.matching.embedding import TrigramEmbedder, TripleEmbedding, embed_label
from eskg.matching.evaluation import evaluate_classification, modal_category
from eskg.matching.matcher import (
    MatcherConfig,
    MatchResult,
    TripleMatcher,
    match_to_abstract,
    similarity,
)
from eskg.matching.selection import (
    Justification,
    UsageLog,
    choose_statement,
    explain,
    select_statement,
)

__all__ = [
    "Justification",
    "MatchResult",
    "MatcherConfig",
    "TrigramEmbedder",
    "TripleEmbedding",
    "TripleMatcher",
    "UsageLog",
    "choose_statement",
    "embed_label",
    "evaluate_classification",
    "explain",
    "match_to_abstract",
    "modal_category",
    "select_statement",
    "similarity",
]
