"""Similarity scoring of child triples against abstract edges."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from eskg.errors import ValidationError
from eskg.kg.model import AbstractEdge, AbstractKG, TripleText
from eskg.matching.embedding import TrigramEmbedder, TripleEmbedding


@dataclass
class MatcherConfig:
    threshold: float = 0.75
    subject_weight: float = 0.25
    relation_weight: float = 0.5
    object_weight: float = 0.25
    dim: int = 64
    seed: int = 0
    redundancy_window: int = 10
    category_mode: str = "sample"  # or "modal"

    def __post_init__(self):
        if not 0.0 <= self.threshold <= 1.0:
            raise ValidationError("threshold must lie in [0, 1]")
        total = self.subject_weight + self.relation_weight + self.object_weight
        if abs(total - 1.0) > 1e-9:
            raise ValidationError(f"slot weights must sum to 1, got {total}")
        if min(self.subject_weight, self.relation_weight, self.object_weight) < 0:
            raise ValidationError("slot weights must be non-negative")
        if self.category_mode not in ("sample", "modal"):
            raise ValidationError("category_mode must be 'sample' or 'modal'")

    def to_dict(self) -> dict:
        return {
            "threshold": self.threshold,
            "subject_weight": self.subject_weight,
            "relation_weight": self.relation_weight,
            "object_weight": self.object_weight,
            "dim": self.dim,
            "seed": self.seed,
            "redundancy_window": self.redundancy_window,
            "category_mode": self.category_mode,
        }

    @classmethod
    def from_dict(cls, d: dict) -> MatcherConfig:
        return cls(**{k: d[k] for k in cls().to_dict() if k in d})


@dataclass
class MatchResult:
    query: TripleText
    best_edge: AbstractEdge | None
    score: float
    threshold: float
    matched: bool

    def to_dict(self) -> dict:
        return {
            "query": self.query.to_dict(),
            "best_edge": self.best_edge.to_dict() if self.best_edge else None,
            "edge_key": self.best_edge.key if self.best_edge else None,
            "score": self.score,
            "threshold": self.threshold,
            "matched": self.matched,
        }


def _slot_similarity(a: np.ndarray, b: np.ndarray) -> float:
    # Cosine mapped onto [0, 1]; a zero vector (empty label) scores neutral.
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    cos = float(a @ b / (na * nb)) if na > 0 and nb > 0 else 0.0
    return min(1.0, max(0.0, (cos + 1.0) / 2.0))


def similarity(a: TripleEmbedding, b: TripleEmbedding, config: MatcherConfig | None = None) -> float:
    """Weighted per-slot similarity in [0, 1]; symmetric, 1.0 on identity."""
    config = config or MatcherConfig()
    if a.dim != b.dim:
        raise ValidationError(f"embedding dimensions differ: {a.dim} vs {b.dim}")
    return (
        config.subject_weight * _slot_similarity(a.subject_vec, b.subject_vec)
        + config.relation_weight * _slot_similarity(a.relation_vec, b.relation_vec)
        + config.object_weight * _slot_similarity(a.object_vec, b.object_vec)
    )


class TripleMatcher:
    """Matches child triples to abstract edges.

    fit() pre-embeds the edge inventory; match() is then pure lookup plus
    scoring. The embedder is replaceable (anything exposing ``embed``).
    """

    def __init__(self, config: MatcherConfig | None = None, embedder=None):
        self.config = config or MatcherConfig()
        self.embedder = embedder or TrigramEmbedder(dim=self.config.dim)
        self._edges: list[tuple[str, AbstractEdge, TripleEmbedding]] = []
        self._abstract: AbstractKG | None = None

    def get_params(self) -> dict:
        return self.config.to_dict()

    def fit(self, abstract: AbstractKG) -> TripleMatcher:
        if not abstract.edges:
            raise ValidationError("cannot match against an empty abstract graph")
        self._abstract = abstract
        self._edges = sorted(
            ((edge.key, edge, self.embedder.embed(abstract.edge_text(edge))) for edge in abstract.edges),
            key=lambda item: item[0],
        )
        return self

    def embed(self, triple: TripleText) -> TripleEmbedding:
        return self.embedder.embed(triple)

    def match(self, query: TripleText, threshold: float | None = None) -> MatchResult:
        if not self._edges:
            raise ValidationError("matcher is not fitted")
        threshold = self.config.threshold if threshold is None else threshold
        query_emb = self.embedder.embed(query)
        best_key, best_edge, best_score = None, None, -1.0
        for key, edge, emb in self._edges:
            score = similarity(query_emb, emb, self.config)
            # Strict > keeps the lexicographically smallest edge key on ties.
            if score > best_score:
                best_key, best_edge, best_score = key, edge, score
        return MatchResult(
            query=query,
            best_edge=best_edge,
            score=best_score,
            threshold=threshold,
            matched=best_edge is not None and best_score >= threshold,
        )


def match_to_abstract(
    query: TripleText, abstract: AbstractKG, config: MatcherConfig | None = None
) -> MatchResult:
    return TripleMatcher(config).fit(abstract).match(query)
