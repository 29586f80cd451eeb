"""Crowd annotations to validated corpus: rating filter, majority
classification, paraphrase intake, and expert review."""

from __future__ import annotations

import statistics
from collections import Counter
from dataclasses import dataclass, field, replace
from enum import Enum

from eskg.corpus.agreement import AgreementReport, CategoryAnnotation, group_by_item
from eskg.corpus.categories import ESCategory
from eskg.errors import ConflictError, NotFoundError, ValidationError
from eskg.kg.model import AbstractKG


@dataclass(frozen=True)
class StatementDraft:
    id: str
    scenario_id: str
    text: str
    author_id: str

    def __post_init__(self):
        if not self.text.strip():
            raise ValidationError(f"draft {self.id!r} has empty text")


@dataclass(frozen=True)
class LikertAnnotation:
    statement_id: str
    rater_id: str
    rating: int

    def __post_init__(self):
        if self.rating not in (1, 2, 3, 4, 5):
            raise ValidationError(f"rating must be 1..5, got {self.rating}")


class Origin(str, Enum):
    CROWD = "crowd"
    PARAPHRASE = "paraphrase"


class ReviewStatus(str, Enum):
    APPROVED = "approved"
    PENDING = "pending"
    REJECTED = "rejected"


@dataclass
class CorpusConfig:
    mean_threshold: float = 3.5
    sd_threshold: float = 1.0
    kappa_threshold: float = 0.4
    statements_per_classification_task: int = 20

    def __post_init__(self):
        if not 1.0 <= self.mean_threshold <= 5.0:
            raise ValidationError("mean_threshold outside the rating scale")
        if self.sd_threshold < 0:
            raise ValidationError("sd_threshold must be non-negative")
        if not -1.0 <= self.kappa_threshold <= 1.0:
            raise ValidationError("kappa_threshold outside [-1, 1]")
        if self.statements_per_classification_task < 1:
            raise ValidationError("statements_per_classification_task must be positive")

    def to_dict(self) -> dict:
        return {
            "mean_threshold": self.mean_threshold,
            "sd_threshold": self.sd_threshold,
            "kappa_threshold": self.kappa_threshold,
            "statements_per_classification_task": self.statements_per_classification_task,
        }

    @classmethod
    def from_dict(cls, d: dict) -> CorpusConfig:
        return cls(**{k: d[k] for k in cls().to_dict() if k in d})


@dataclass
class RatedDraft:
    draft: StatementDraft
    mean: float
    sd: float


@dataclass
class Exclusion:
    draft: StatementDraft
    reasons: list[str]
    mean: float | None = None
    sd: float | None = None
    item_kappa: float | None = None


@dataclass
class LikertFilterResult:
    kept: list[RatedDraft]
    excluded: list[Exclusion]
    under_annotated: list[StatementDraft]


def likert_filter(
    drafts: list[StatementDraft],
    annotations: list[LikertAnnotation],
    config: CorpusConfig,
) -> LikertFilterResult:
    """Drop drafts rated too low on average or too inconsistently.

    Sample (n-1) standard deviation; drafts with fewer than two ratings are
    reported separately, neither kept nor excluded. kept + excluded +
    under-annotated partition the input.
    """
    by_statement: dict[str, list[int]] = {}
    for ann in annotations:
        by_statement.setdefault(ann.statement_id, []).append(ann.rating)
    kept, excluded, under = [], [], []
    for draft in drafts:
        ratings = by_statement.get(draft.id, [])
        if len(ratings) < 2:
            under.append(draft)
            continue
        mean = statistics.mean(ratings)
        sd = statistics.stdev(ratings)
        reasons = []
        if mean < config.mean_threshold:
            reasons.append(f"low_mean: {mean:.4g} < {config.mean_threshold}")
        if sd > config.sd_threshold:
            reasons.append(f"high_sd: {sd:.4g} > {config.sd_threshold}")
        if reasons:
            excluded.append(Exclusion(draft=draft, reasons=reasons, mean=mean, sd=sd))
        else:
            kept.append(RatedDraft(draft=draft, mean=mean, sd=sd))
    return LikertFilterResult(kept=kept, excluded=excluded, under_annotated=under)


@dataclass
class ValidatedStatement:
    id: str
    scenario_id: str
    text: str
    category: ESCategory | None
    mean_rating: float | None = None
    sd_rating: float | None = None
    item_kappa: float | None = None
    origin: Origin = Origin.CROWD
    review: ReviewStatus = ReviewStatus.APPROVED

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "scenario_id": self.scenario_id,
            "text": self.text,
            "category": self.category.value if self.category else None,
            "mean_rating": self.mean_rating,
            "sd_rating": self.sd_rating,
            "item_kappa": self.item_kappa,
            "origin": self.origin.value,
            "review": self.review.value,
        }

    @classmethod
    def from_dict(cls, d: dict) -> ValidatedStatement:
        return cls(
            id=d["id"],
            scenario_id=d["scenario_id"],
            text=d["text"],
            category=ESCategory(d["category"]) if d.get("category") else None,
            mean_rating=d.get("mean_rating"),
            sd_rating=d.get("sd_rating"),
            item_kappa=d.get("item_kappa"),
            origin=Origin(d.get("origin", "crowd")),
            review=ReviewStatus(d.get("review", "approved")),
        )


@dataclass
class ClassificationResult:
    validated: list[ValidatedStatement]
    excluded: list[Exclusion]


def classify_by_majority(
    rated: list[RatedDraft],
    annotations: list[CategoryAnnotation],
    report: AgreementReport,
    config: CorpusConfig,
) -> ClassificationResult:
    """Assign each statement its modal category.

    Ties and items whose agreement falls under the kappa threshold are
    excluded as ambiguous, never resolved arbitrarily. Items the report
    dropped for a deviating rater count are excluded likewise.
    """
    counts = group_by_item(annotations)
    validated, excluded = [], []
    for rd in rated:
        draft = rd.draft
        item_counts = counts.get(draft.id)
        if not item_counts:
            raise ValidationError(f"statement {draft.id!r} has no category annotations")
        if draft.id not in report.per_item:
            excluded.append(
                Exclusion(draft=draft, reasons=["rater_count_deviates"], mean=rd.mean, sd=rd.sd)
            )
            continue
        item_kappa = report.per_item[draft.id]
        top = item_counts.most_common()
        is_tie = len(top) > 1 and top[0][1] == top[1][1]
        reasons = []
        if is_tie:
            reasons.append("tie")
        if item_kappa < config.kappa_threshold:
            reasons.append(f"low_kappa: {item_kappa:.4g} < {config.kappa_threshold}")
        if reasons:
            excluded.append(
                Exclusion(draft=draft, reasons=reasons, mean=rd.mean, sd=rd.sd, item_kappa=item_kappa)
            )
            continue
        validated.append(
            ValidatedStatement(
                id=draft.id,
                scenario_id=draft.scenario_id,
                text=draft.text,
                category=top[0][0],
                mean_rating=rd.mean,
                sd_rating=rd.sd,
                item_kappa=item_kappa,
                origin=Origin.CROWD,
                review=ReviewStatus.APPROVED,
            )
        )
    return ClassificationResult(validated=validated, excluded=excluded)


@dataclass(frozen=True)
class Paraphrase:
    id: str
    source_id: str
    text: str


class Corpus:
    """The statement inventory: validated crowd statements plus paraphrases
    awaiting expert review."""

    def __init__(self, statements: list[ValidatedStatement] | None = None,
                 config: CorpusConfig | None = None,
                 report: AgreementReport | None = None):
        self.statements: dict[str, ValidatedStatement] = {}
        for s in statements or []:
            if s.id in self.statements:
                raise ConflictError(f"duplicate statement id {s.id!r}")
            self.statements[s.id] = s
        self.config = config or CorpusConfig()
        self.report = report

    def get(self, statement_id: str) -> ValidatedStatement:
        try:
            return self.statements[statement_id]
        except KeyError:
            raise NotFoundError(f"unknown statement {statement_id!r}") from None

    def selectable(self, scenario_id: str | None = None, category: ESCategory | None = None) -> list[ValidatedStatement]:
        """Statements the matcher may emit: approved, with a category set."""
        out = []
        for s in sorted(self.statements.values(), key=lambda s: s.id):
            if s.review is not ReviewStatus.APPROVED or s.category is None:
                continue
            if scenario_id is not None and s.scenario_id != scenario_id:
                continue
            if category is not None and s.category is not category:
                continue
            out.append(s)
        return out

    def pending(self) -> list[ValidatedStatement]:
        return [s for s in sorted(self.statements.values(), key=lambda s: s.id)
                if s.review is ReviewStatus.PENDING]

    def to_dict(self) -> dict:
        return {
            "schema_version": 1,
            "config": self.config.to_dict(),
            "report": self.report.to_dict() if self.report else None,
            "statements": [s.to_dict() for s in sorted(self.statements.values(), key=lambda s: s.id)],
        }

    @classmethod
    def from_dict(cls, d: dict) -> Corpus:
        return cls(
            statements=[ValidatedStatement.from_dict(s) for s in d.get("statements", [])],
            config=CorpusConfig.from_dict(d.get("config", {})),
            report=AgreementReport.from_dict(d["report"]) if d.get("report") else None,
        )


def ingest_paraphrases(corpus: Corpus, paraphrases: list[Paraphrase]) -> Corpus:
    """Add machine paraphrases as pending statements inheriting the source's
    scenario and category."""
    for p in paraphrases:
        source = corpus.get(p.source_id)
        if p.id in corpus.statements:
            raise ConflictError(f"statement id {p.id!r} already in the corpus")
        corpus.statements[p.id] = ValidatedStatement(
            id=p.id,
            scenario_id=source.scenario_id,
            text=p.text,
            category=source.category,
            origin=Origin.PARAPHRASE,
            review=ReviewStatus.PENDING,
        )
    return corpus


def expert_review(corpus: Corpus, statement_id: str, verdict: ReviewStatus) -> Corpus:
    statement = corpus.get(statement_id)
    if statement.review is not ReviewStatus.PENDING:
        raise ConflictError(f"statement {statement_id!r} is not pending (is {statement.review.value})")
    if verdict not in (ReviewStatus.APPROVED, ReviewStatus.REJECTED):
        raise ValidationError("verdict must be approved or rejected")
    corpus.statements[statement_id] = replace(statement, review=verdict)
    return corpus


def edge_category_distribution(corpus: Corpus, abstract: AbstractKG) -> AbstractKG:
    """Fill each scenario-bearing edge's category weights with the relative
    frequencies of its approved statements. Returns a bumped copy."""
    out = abstract.copy()
    for edge in out.edges:
        if edge.scenario_id is None:
            continue
        counter = Counter(s.category for s in corpus.selectable(scenario_id=edge.scenario_id))
        total = sum(counter.values())
        edge.category_distribution = (
            {cat.value: count / total for cat, count in sorted(counter.items())} if total else {}
        )
    out.bump()
    return out
