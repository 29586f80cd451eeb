"""Statement selection with a per-child redundancy window, and the
justification chain for every emitted statement."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from datetime import datetime, timezone

from eskg.corpus.categories import ESCategory
from eskg.corpus.pipeline import Corpus, ValidatedStatement
from eskg.errors import ValidationError
from eskg.kg.model import TripleText
from eskg.matching.matcher import MatcherConfig, MatchResult


@dataclass
class UsageLog:
    """Append-only record of statements dispensed to one child."""

    child_id: str
    entries: list[tuple[str, datetime]] = field(default_factory=list)

    def append(self, statement_id: str, at: datetime | None = None):
        self.entries.append((statement_id, at or datetime.now(timezone.utc)))

    def recent_ids(self, window: int) -> set[str]:
        return {sid for sid, _ in self.entries[-window:]} if window > 0 else set()

    def last_use_index(self, statement_id: str) -> int:
        for i in range(len(self.entries) - 1, -1, -1):
            if self.entries[i][0] == statement_id:
                return i
        return -1

    def to_dict(self) -> dict:
        return {
            "child_id": self.child_id,
            "entries": [{"statement_id": sid, "at": at.isoformat()} for sid, at in self.entries],
        }


def _pick_category(distribution: dict[str, float], rng: random.Random, mode: str) -> ESCategory:
    items = sorted(distribution.items())
    if mode == "modal":
        # max() keeps the first maximum, so ties fall to the smaller code.
        return ESCategory(max(items, key=lambda kv: kv[1])[0])
    codes, weights = zip(*items)
    return ESCategory(rng.choices(codes, weights=weights, k=1)[0])


def choose_statement(
    match: MatchResult,
    corpus: Corpus,
    usage: UsageLog,
    seed: int,
    config: MatcherConfig | None = None,
) -> ValidatedStatement | None:
    """Pick a category-matched statement avoiding the last-W window.

    Pure: reads the usage log without appending. Returns None when the
    matched edge has no selectable statement at all (callers fall back to a
    clarification instead of inventing support).
    """
    config = config or MatcherConfig()
    if not match.matched or match.best_edge is None:
        raise ValidationError("cannot select a statement for an unmatched triple")
    edge = match.best_edge
    if edge.scenario_id is None or not edge.category_distribution:
        return None
    rng = random.Random(seed)
    # Restrict the draw to categories that still have selectable statements;
    # reviews may have rejected everything a weight once counted.
    live = {
        code: w
        for code, w in edge.category_distribution.items()
        if corpus.selectable(scenario_id=edge.scenario_id, category=ESCategory(code))
    }
    if not live:
        return None
    category = _pick_category(live, rng, config.category_mode)
    pool = corpus.selectable(scenario_id=edge.scenario_id, category=category)
    recent = usage.recent_ids(config.redundancy_window)
    fresh = [s for s in pool if s.id not in recent]
    if fresh:
        return rng.choice(fresh)
    # Whole pool seen recently: fall back to the least-recently-used.
    return min(pool, key=lambda s: (usage.last_use_index(s.id), s.id))


def select_statement(
    match: MatchResult,
    corpus: Corpus,
    usage: UsageLog,
    seed: int,
    config: MatcherConfig | None = None,
    at: datetime | None = None,
) -> tuple[ValidatedStatement, UsageLog] | None:
    """choose_statement plus the log append."""
    statement = choose_statement(match, corpus, usage, seed, config)
    if statement is None:
        return None
    usage.append(statement.id, at)
    return statement, usage


@dataclass(frozen=True)
class Justification:
    """The audit chain from a child triple to the statement it triggered."""

    query: TripleText
    edge_key: str
    scenario_id: str
    category: str
    statement_id: str
    score: float
    threshold: float

    def to_dict(self) -> dict:
        return {
            "query": self.query.to_dict(),
            "edge_key": self.edge_key,
            "scenario_id": self.scenario_id,
            "category": self.category,
            "statement_id": self.statement_id,
            "score": self.score,
            "threshold": self.threshold,
        }

    @classmethod
    def from_dict(cls, d: dict) -> Justification:
        return cls(
            query=TripleText(**d["query"]),
            edge_key=d["edge_key"],
            scenario_id=d["scenario_id"],
            category=d["category"],
            statement_id=d["statement_id"],
            score=d["score"],
            threshold=d["threshold"],
        )


def explain(match: MatchResult, statement: ValidatedStatement) -> Justification:
    if not match.matched or match.best_edge is None:
        raise ValidationError("no justification exists for an unmatched triple")
    edge = match.best_edge
    if statement.category is None or edge.scenario_id is None:
        raise ValidationError("statement or edge is missing the chain links")
    return Justification(
        query=match.query,
        edge_key=edge.key,
        scenario_id=edge.scenario_id,
        category=statement.category.value,
        statement_id=statement.id,
        score=match.score,
        threshold=match.threshold,
    )
