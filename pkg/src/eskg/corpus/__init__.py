from eskg.corpus.agreement import AgreementReport, CategoryAnnotation, free_marginal_kappa
from eskg.corpus.categories import CATEGORY_COUNT, ESCategory
from eskg.corpus.pipeline import (
    ClassificationResult,
    Corpus,
    CorpusConfig,
    Exclusion,
    LikertAnnotation,
    LikertFilterResult,
    Origin,
    Paraphrase,
    RatedDraft,
    ReviewStatus,
    StatementDraft,
    ValidatedStatement,
    classify_by_majority,
    edge_category_distribution,
    expert_review,
    ingest_paraphrases,
    likert_filter,
)

__all__ = [
    "AgreementReport",
    "CATEGORY_COUNT",
    "CategoryAnnotation",
    "ClassificationResult",
    "Corpus",
    "CorpusConfig",
    "ESCategory",
    "Exclusion",
    "LikertAnnotation",
    "LikertFilterResult",
    "Origin",
    "Paraphrase",
    "RatedDraft",
    "ReviewStatus",
    "StatementDraft",
    "ValidatedStatement",
    "classify_by_majority",
    "edge_category_distribution",
    "expert_review",
    "free_marginal_kappa",
    "ingest_paraphrases",
    "likert_filter",
]
