"""Ranking evaluation for future-quadruple prediction, plus the two
reference scorers (weekday-frequency counts and a seeded random scorer)."""

from __future__ import annotations

from dataclasses import dataclass
from datetime import date, timedelta
from typing import Callable

import numpy as np

from eskg.analytics.tkge import N_TIME_BUCKETS, Quadruple
from eskg.errors import ValidationError

Scorer = Callable[[Quadruple], float]


class WeekdayFrequencyBaseline:
    """Scores a quadruple by how often that exact fact occurred on the
    queried weekday in the training window. Pure counting, no vectors."""

    def __init__(self):
        self.counts: dict[tuple[str, str, str, int], int] = {}
        self.max_training_date: date | None = None

    def fit(self, quadruples: list[Quadruple]) -> WeekdayFrequencyBaseline:
        for q in quadruples:
            key = (q.subject, q.relation, q.object, q.date.weekday())
            self.counts[key] = self.counts.get(key, 0) + 1
            if self.max_training_date is None or q.date > self.max_training_date:
                self.max_training_date = q.date
        return self

    def plausibility(self, q: Quadruple) -> float:
        return float(self.counts.get((q.subject, q.relation, q.object, q.date.weekday()), 0))


class RandomScorer:
    def __init__(self, seed: int = 0):
        self._rng = np.random.default_rng(seed)

    def plausibility(self, q: Quadruple) -> float:
        return float(self._rng.random())


@dataclass
class PredictionReport:
    average_precision: float
    hits_at_1: float
    n_queries: int
    candidates_per_query: int

    def to_dict(self) -> dict:
        return {
            "average_precision": self.average_precision,
            "hits_at_1": self.hits_at_1,
            "n_queries": self.n_queries,
            "candidates_per_query": self.candidates_per_query,
        }


def corruptions_for(
    q: Quadruple, entities: list[str], count: int, rng: np.random.Generator
) -> list[Quadruple]:
    """Distinct corruptions of the object or the weekday, never equal to the
    true quadruple."""
    out: list[Quadruple] = []
    seen = {q}
    attempts = 0
    while len(out) < count and attempts < 50 * (count + 1):
        attempts += 1
        if len(entities) > 1 and rng.random() < 0.5:
            candidate_obj = entities[int(rng.integers(len(entities)))]
            cand = Quadruple(q.subject, q.relation, candidate_obj, q.date)
        else:
            shift = int(rng.integers(1, N_TIME_BUCKETS))
            cand = Quadruple(q.subject, q.relation, q.object, q.date + timedelta(days=shift))
        if cand not in seen:
            seen.add(cand)
            out.append(cand)
    if len(out) < count:
        raise ValidationError("not enough distinct corruptions available")
    return out


def evaluate_prediction(
    scorer: Scorer,
    held_out: list[Quadruple],
    entities: list[str],
    candidates_per_query: int = 2,
    seed: int = 0,
    training_cutoff: date | None = None,
) -> PredictionReport:
    """Rank each held-out quadruple among sampled corruptions.

    Average precision treats the single true quadruple as the relevant item
    (AP per query = 1/rank); ties rank pessimistically. Held-out facts must
    postdate the training window when a cutoff is given.
    """
    if not held_out:
        raise ValidationError("empty held-out set")
    if candidates_per_query < 2:
        raise ValidationError("need at least 2 candidates per query")
    if training_cutoff is not None:
        stale = [q for q in held_out if q.date <= training_cutoff]
        if stale:
            raise ValidationError(
                f"{len(stale)} held-out quadruples do not postdate the training window"
            )
    rng = np.random.default_rng(seed)
    ap_total = 0.0
    hits = 0
    for q in held_out:
        true_score = scorer(q)
        rank = 1
        for cand in corruptions_for(q, entities, candidates_per_query - 1, rng):
            if scorer(cand) >= true_score:
                rank += 1
        ap_total += 1.0 / rank
        if rank == 1:
            hits += 1
    n = len(held_out)
    return PredictionReport(
        average_precision=ap_total / n,
        hits_at_1=hits / n,
        n_queries=n,
        candidates_per_query=candidates_per_query,
    )
