"""Relational-order pattern mining: which relation tends to follow which."""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass

from eskg.errors import ValidationError
from eskg.kg.model import ChildTKG

from eskg.analytics.stats import dated_events


@dataclass(frozen=True)
class OrderPattern:
    antecedent: str
    consequent: str
    max_lag_days: float
    support: int
    confidence: float

    def to_dict(self) -> dict:
        return {
            "antecedent": self.antecedent,
            "consequent": self.consequent,
            "max_lag_days": self.max_lag_days,
            "support": self.support,
            "confidence": self.confidence,
        }


def mine_order_patterns(tkg: ChildTKG, max_lag_days: float, min_support: int = 1) -> list[OrderPattern]:
    """For each ordered relation pair (A, B): support counts A-events that are
    followed by at least one strictly later B-event within the lag; confidence
    divides by the number of A-events. Sorted by confidence, then support,
    then the pair, descending on the numbers.
    """
    if max_lag_days <= 0:
        raise ValidationError("max_lag_days must be positive")
    events = dated_events(tkg)
    by_relation: dict[str, list] = {}
    for event in events:
        by_relation.setdefault(event.triple.relation, []).append(event.time.start)

    patterns = []
    for ant, ant_times in by_relation.items():
        for cons, cons_times in by_relation.items():
            support = 0
            for t in ant_times:
                # First consequent event strictly after t (self-pairs must not
                # count the antecedent event itself).
                idx = bisect_right(cons_times, t)
                if idx < len(cons_times):
                    lag = (cons_times[idx] - t).total_seconds() / 86400.0
                    if lag <= max_lag_days:
                        support += 1
            if support >= min_support and support > 0:
                patterns.append(
                    OrderPattern(
                        antecedent=ant,
                        consequent=cons,
                        max_lag_days=max_lag_days,
                        support=support,
                        confidence=support / len(ant_times),
                    )
                )
    patterns.sort(key=lambda p: (-p.confidence, -p.support, p.antecedent, p.consequent))
    return patterns
