"""Chronological walks over a child graph and their anonymized export.

A walk never steps backward in time and only crosses events sharing the
current entity. Anonymized walks replace entity labels with type-indexed
pseudonyms and coarsen dates to ISO weeks; the pseudonym map stays on the
object and is never serialized.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from datetime import datetime
from typing import Callable

from eskg.errors import ConflictError, NotFoundError, ValidationError
from eskg.kg.model import ChildTKG, EntityType, TimeKind, TimeRef

SCHEMA_VERSION = 1


def iso_week(dt: datetime) -> str:
    year, week, _ = dt.isocalendar()
    return f"{year}-W{week:02d}"


@dataclass(frozen=True)
class WalkStep:
    source_id: str
    source_label: str
    source_type: EntityType
    relation_label: str
    target_id: str
    target_label: str
    target_type: EntityType
    time: TimeRef
    event_id: str

    def to_dict(self) -> dict:
        return {
            "source": self.source_label,
            "relation": self.relation_label,
            "target": self.target_label,
            "time": self.time.to_dict(),
            "event_id": self.event_id,
        }


@dataclass
class TemporalWalk:
    child_id: str
    start_entity: str
    steps: list[WalkStep]
    anonymized: bool = False
    # Original entity id -> pseudonym; server-side only, never serialized.
    pseudonym_map: dict[str, str] | None = None

    def to_dict(self) -> dict:
        if self.anonymized:
            steps = [
                {
                    "source": self.pseudonym_map[s.source_id],
                    "relation": s.relation_label,
                    "target": self.pseudonym_map[s.target_id],
                    "week": iso_week(s.time.start),
                    "end_week": iso_week(s.time.end) if s.time.kind is TimeKind.INTERVAL else None,
                }
                for s in self.steps
            ]
            return {"schema_version": SCHEMA_VERSION, "anonymized": True, "steps": steps}
        return {
            "schema_version": SCHEMA_VERSION,
            "anonymized": False,
            "child_id": self.child_id,
            "start_entity": self.start_entity,
            "steps": [s.to_dict() for s in self.steps],
        }


def sample_temporal_walk(
    tkg: ChildTKG, start_entity: str, max_steps: int, seed: int = 0
) -> TemporalWalk:
    """Uniform seeded walk over dated live events with non-decreasing times.

    Each event is crossed at most once; otherwise any pair of equal-time
    events touching the same entity would loop until max_steps.
    """
    if start_entity not in tkg.entities:
        raise NotFoundError(f"unknown entity {start_entity!r}")
    if max_steps < 0:
        raise ValidationError("max_steps must be non-negative")
    rng = random.Random(seed)
    dated = sorted(
        (e for e in tkg.live_events() if e.time.is_known),
        key=lambda e: (e.time.start, e.id),
    )
    current = start_entity
    horizon: datetime | None = None
    used: set[str] = set()
    steps: list[WalkStep] = []
    while len(steps) < max_steps:
        options = [
            e
            for e in dated
            if e.id not in used
            and (e.triple.subject == current or e.triple.object == current)
            and (horizon is None or e.time.start >= horizon)
        ]
        if not options:
            break
        event = rng.choice(options)
        t = event.triple
        other = t.object if t.subject == current else t.subject
        steps.append(
            WalkStep(
                source_id=current,
                source_label=tkg.entities[current].label,
                source_type=tkg.entities[current].entity_type,
                relation_label=tkg.relations[t.relation].label,
                target_id=other,
                target_label=tkg.entities[other].label,
                target_type=tkg.entities[other].entity_type,
                time=event.time,
                event_id=event.id,
            )
        )
        used.add(event.id)
        horizon = event.time.start
        current = other
    return TemporalWalk(child_id=tkg.child_id, start_entity=start_entity, steps=steps)


PseudonymGenerator = Callable[[EntityType, int], str]


def default_pseudonyms(entity_type: EntityType, index: int) -> str:
    return f"{entity_type.value}-{index}"


def anonymize_walk(
    walk: TemporalWalk,
    generator: PseudonymGenerator = default_pseudonyms,
    seed: int = 0,
) -> TemporalWalk:
    """Type-aware pseudonymization: per type, indices are a seeded shuffle of
    the distinct entities, so first-appearance order leaks nothing."""
    if walk.anonymized:
        raise ConflictError("walk is already anonymized")
    by_type: dict[EntityType, list[str]] = {}
    for s in walk.steps:
        for eid, etype in ((s.source_id, s.source_type), (s.target_id, s.target_type)):
            bucket = by_type.setdefault(etype, [])
            if eid not in bucket:
                bucket.append(eid)
    rng = random.Random(seed)
    pseudonyms: dict[str, str] = {}
    for etype in sorted(by_type, key=lambda t: t.value):
        ids = sorted(by_type[etype])
        rng.shuffle(ids)
        for i, eid in enumerate(ids, start=1):
            pseudonyms[eid] = generator(etype, i)
    return TemporalWalk(
        child_id=walk.child_id,
        start_entity=walk.start_entity,
        steps=list(walk.steps),
        anonymized=True,
        pseudonym_map=pseudonyms,
    )
