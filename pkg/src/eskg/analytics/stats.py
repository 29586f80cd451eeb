"""Per-relation history statistics for the expert view."""

from __future__ import annotations

import statistics
from dataclasses import dataclass, field

from eskg.errors import NotFoundError
from eskg.kg.model import ChildTKG, TemporalTriple


@dataclass
class RelationStats:
    relation_id: str
    event_ids: list[str]
    count: int
    undated: int
    total_duration_days: float
    frequency_per_30d: float
    gaps_days: list[float]
    outlier_flags: list[bool]

    def to_dict(self) -> dict:
        return {
            "relation_id": self.relation_id,
            "event_ids": self.event_ids,
            "count": self.count,
            "undated": self.undated,
            "total_duration_days": self.total_duration_days,
            "frequency_per_30d": self.frequency_per_30d,
            "gaps_days": self.gaps_days,
            "outlier_flags": self.outlier_flags,
        }


def dated_events(tkg: ChildTKG, relation_id: str | None = None) -> list[TemporalTriple]:
    """Live events with a known time, sorted by start then id."""
    events = [
        e
        for e in tkg.live_events()
        if e.time.is_known and (relation_id is None or e.triple.relation == relation_id)
    ]
    return sorted(events, key=lambda e: (e.time.start, e.id))


def relation_stats(tkg: ChildTKG, relation_id: str, outlier_threshold: float = 2.0) -> RelationStats:
    """Durations, 30-day frequency, inter-event gaps, and gap outliers.

    Instants contribute zero duration. An event is flagged as an outlier iff
    the absolute z-score of its preceding gap (sample sd over all gaps)
    exceeds the threshold; the first event bears no flag. Undated events are
    counted but excluded from the temporal statistics.
    """
    if relation_id not in tkg.relations:
        raise NotFoundError(f"unknown relation {relation_id!r}")
    events = dated_events(tkg, relation_id)
    undated = sum(
        1 for e in tkg.live_events() if e.triple.relation == relation_id and not e.time.is_known
    )
    if not events:
        return RelationStats(relation_id, [], 0, undated, 0.0, 0.0, [], [])

    total_duration = sum(e.time.duration_days() for e in events)
    starts = [e.time.start for e in events]
    span_days = (starts[-1] - starts[0]).total_seconds() / 86400.0
    frequency = len(events) / max(span_days / 30.0, 1.0)
    gaps = [
        (b - a).total_seconds() / 86400.0 for a, b in zip(starts, starts[1:])
    ]

    flags = [False] * len(events)
    if len(gaps) >= 2:
        sd = statistics.stdev(gaps)
        if sd > 0:
            mean = statistics.mean(gaps)
            for i, gap in enumerate(gaps):
                if abs(gap - mean) / sd > outlier_threshold:
                    flags[i + 1] = True

    return RelationStats(
        relation_id=relation_id,
        event_ids=[e.id for e in events],
        count=len(events),
        undated=undated,
        total_duration_days=total_duration,
        frequency_per_30d=frequency,
        gaps_days=gaps,
        outlier_flags=flags,
    )
