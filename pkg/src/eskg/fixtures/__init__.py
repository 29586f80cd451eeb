"""Packaged demo data: the curated abstract graph, a small approved corpus,
and synthetic child graphs used by tests, docs, and the demo service."""

from __future__ import annotations

from datetime import date, datetime, timedelta, timezone
from importlib import resources

from eskg.analytics.tkge import Quadruple
from eskg.corpus.io import load_corpus
from eskg.corpus.pipeline import Corpus
from eskg.kg.io import load_abstract_kg
from eskg.kg.model import (
    AbstractKG,
    ChildTKG,
    Entity,
    EntityType,
    Polarity,
    Provenance,
    RelationType,
    TemporalTriple,
    TimeRef,
    Triple,
)


def _path(name: str):
    return resources.files("eskg.fixtures") / name


def seed_abstract_kg() -> AbstractKG:
    return load_abstract_kg(str(_path("abstract_kg.json")))


def seed_corpus() -> Corpus:
    return load_corpus(str(_path("seed_corpus.json")))


def _event(n: int, triple: Triple, at: datetime) -> TemporalTriple:
    return TemporalTriple(
        id=f"ev-{n:04d}",
        triple=triple,
        time=TimeRef.instant(at),
        provenance=Provenance.AUTOMATED,
        created_at=at,
    )


def saturday_tkg(weeks: int = 20, start: date = date(2024, 1, 6)) -> ChildTKG:
    """A child graph with a weekly rhythm: a happy self-state every Saturday,
    homework on Wednesdays, a teacher chat on Mondays.

    ``start`` must be a Saturday.
    """
    assert start.weekday() == 5, "fixture start must be a Saturday"
    tkg = ChildTKG("c-demo")
    entities = [
        Entity("ent-0001", "Riley", EntityType.CHILD),
        Entity("ent-0002", "Mom", EntityType.PARENT),
        Entity("ent-0003", "Ms. Finch", EntityType.TEACHER),
        Entity("ent-0004", "math homework", EntityType.OBJECT),
    ]
    for e in entities:
        tkg.entities[e.id] = e
    tkg.entity_map = {
        "ent-0001": "a_child",
        "ent-0002": "a_parent",
        "ent-0003": "a_teacher",
        "ent-0004": "a_homework",
    }
    for r in [
        RelationType("rel-0001", "feels happy", Polarity.POSITIVE),
        RelationType("rel-0002", "works on", Polarity.NEUTRAL),
        RelationType("rel-0003", "talks to", Polarity.NEUTRAL),
    ]:
        tkg.relations[r.id] = r

    events = []
    for week in range(weeks):
        saturday = start + timedelta(weeks=week)
        events.append((Triple("ent-0001", "rel-0001", "ent-0001"), saturday, 10))
        wednesday = saturday + timedelta(days=4)
        events.append((Triple("ent-0001", "rel-0002", "ent-0004"), wednesday, 16))
        if week % 2 == 0:
            monday = saturday + timedelta(days=2)
            events.append((Triple("ent-0001", "rel-0003", "ent-0003"), monday, 9))
    events.sort(key=lambda item: (item[1], item[2]))
    for n, (triple, day, hour) in enumerate(events, start=1):
        at = datetime(day.year, day.month, day.day, hour, 0, tzinfo=timezone.utc)
        tkg.append_event(_event(n, triple, at))
    return tkg


def saturday_held_out(tkg: ChildTKG, count: int = 4) -> list[Quadruple]:
    """Future Saturday happy-state quadruples, strictly after training data."""
    last = max(e.time.start.date() for e in tkg.live_events() if e.time.is_known)
    days_to_saturday = (5 - last.weekday()) % 7 or 7
    first = last + timedelta(days=days_to_saturday)
    return [
        Quadruple("ent-0001", "rel-0001", "ent-0001", first + timedelta(weeks=i))
        for i in range(count)
    ]


def walk_demo_tkg() -> ChildTKG:
    """A small graph for walk and anonymization demos; labels deliberately
    avoid entity-type words so privacy string checks are meaningful."""
    tkg = ChildTKG("c-walk")
    entities = [
        Entity("ent-0001", "Riley", EntityType.CHILD),
        Entity("ent-0002", "Mika", EntityType.SIBLING),
        Entity("ent-0003", "Jo", EntityType.FRIEND),
        Entity("ent-0004", "Ms. Finch", EntityType.TEACHER),
        Entity("ent-0005", "Greenhill", EntityType.PLACE),
    ]
    for e in entities:
        tkg.entities[e.id] = e
        tkg.entity_map[e.id] = None
    for r in [
        RelationType("rel-0001", "argues with", Polarity.NEGATIVE),
        RelationType("rel-0002", "plays with", Polarity.POSITIVE),
        RelationType("rel-0003", "feels lonely at", Polarity.NEGATIVE),
        RelationType("rel-0004", "talks to", Polarity.NEUTRAL),
    ]:
        tkg.relations[r.id] = r
    base = datetime(2024, 3, 4, 9, 0, tzinfo=timezone.utc)
    chain = [
        (Triple("ent-0001", "rel-0001", "ent-0002"), 0),
        (Triple("ent-0001", "rel-0003", "ent-0005"), 1),
        (Triple("ent-0001", "rel-0004", "ent-0004"), 2),
        (Triple("ent-0001", "rel-0002", "ent-0003"), 3),
        (Triple("ent-0003", "rel-0004", "ent-0004"), 4),
        (Triple("ent-0002", "rel-0002", "ent-0003"), 5),
    ]
    for n, (triple, day) in enumerate(chain, start=1):
        tkg.append_event(_event(n, triple, base + timedelta(days=day)))
    return tkg
