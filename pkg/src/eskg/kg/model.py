"""Graph data model: the abstract stressor graph and per-child temporal graphs.

The abstract graph is the curated, child-independent network of stressor
triples; each child owns a temporal graph whose event list is append-only
(corrections are tombstones, never deletions).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from enum import Enum

from eskg.errors import ConflictError, IntegrityError, NotFoundError


def normalize_label(label: str) -> str:
    """Lowercase, treat underscores as spaces, collapse whitespace runs."""
    return " ".join(label.lower().replace("_", " ").split())


def parse_datetime(value: str) -> datetime:
    # ISO-8601; tolerate a trailing Z, assume UTC for naive values.
    dt = datetime.fromisoformat(value.replace("Z", "+00:00"))
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc)


def _clip_minute(dt: datetime) -> datetime:
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc).replace(second=0, microsecond=0)


class EntityType(str, Enum):
    CHILD = "child"
    PARENT = "parent"
    FRIEND = "friend"
    TEACHER = "teacher"
    SIBLING = "sibling"
    EXPERT = "expert"
    ACTIVITY = "activity"
    PLACE = "place"
    OBJECT = "object"
    OTHER = "other"


class Polarity(str, Enum):
    NEGATIVE = "negative"
    NEUTRAL = "neutral"
    POSITIVE = "positive"


class Provenance(str, Enum):
    AUTOMATED = "automated"
    MANUAL = "manual"


@dataclass(frozen=True)
class Entity:
    id: str
    label: str
    entity_type: EntityType

    def __post_init__(self):
        if not self.label.strip():
            raise IntegrityError(f"entity {self.id!r} has an empty label")

    def to_dict(self) -> dict:
        return {"id": self.id, "label": self.label, "entity_type": self.entity_type.value}

    @classmethod
    def from_dict(cls, d: dict) -> Entity:
        return cls(id=d["id"], label=d["label"], entity_type=EntityType(d["entity_type"]))


@dataclass(frozen=True)
class RelationType:
    id: str
    label: str
    polarity: Polarity = Polarity.NEUTRAL

    def to_dict(self) -> dict:
        return {"id": self.id, "label": self.label, "polarity": self.polarity.value}

    @classmethod
    def from_dict(cls, d: dict) -> RelationType:
        return cls(id=d["id"], label=d["label"], polarity=Polarity(d.get("polarity", "neutral")))


@dataclass(frozen=True)
class Triple:
    """(subject, relation, object) as id references into the owning graph."""

    subject: str
    relation: str
    object: str

    def to_dict(self) -> dict:
        return {"subject": self.subject, "relation": self.relation, "object": self.object}

    @classmethod
    def from_dict(cls, d: dict) -> Triple:
        return cls(subject=d["subject"], relation=d["relation"], object=d["object"])


class TimeKind(str, Enum):
    INSTANT = "instant"
    INTERVAL = "interval"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class TimeRef:
    """A UTC instant, interval, or unknown time, at minute granularity."""

    kind: TimeKind
    start: datetime | None = None
    end: datetime | None = None

    def __post_init__(self):
        if self.kind is TimeKind.UNKNOWN:
            if self.start is not None or self.end is not None:
                raise IntegrityError("unknown TimeRef must carry no bounds")
            return
        if self.start is None:
            raise IntegrityError(f"{self.kind.value} TimeRef requires a start")
        object.__setattr__(self, "start", _clip_minute(self.start))
        if self.kind is TimeKind.INSTANT:
            if self.end is not None:
                raise IntegrityError("instant TimeRef must not carry an end")
        else:
            if self.end is None:
                raise IntegrityError("interval TimeRef requires an end")
            object.__setattr__(self, "end", _clip_minute(self.end))
            if self.end < self.start:
                raise IntegrityError("interval end precedes start")

    @classmethod
    def instant(cls, at: datetime) -> TimeRef:
        return cls(kind=TimeKind.INSTANT, start=at)

    @classmethod
    def interval(cls, start: datetime, end: datetime) -> TimeRef:
        return cls(kind=TimeKind.INTERVAL, start=start, end=end)

    @classmethod
    def unknown(cls) -> TimeRef:
        return cls(kind=TimeKind.UNKNOWN)

    @property
    def is_known(self) -> bool:
        return self.kind is not TimeKind.UNKNOWN

    def duration_days(self) -> float:
        if self.kind is TimeKind.INTERVAL:
            return (self.end - self.start).total_seconds() / 86400.0
        return 0.0

    def to_dict(self) -> dict:
        d: dict = {"kind": self.kind.value}
        if self.start is not None:
            d["start"] = self.start.isoformat()
        if self.end is not None:
            d["end"] = self.end.isoformat()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> TimeRef:
        return cls(
            kind=TimeKind(d["kind"]),
            start=parse_datetime(d["start"]) if d.get("start") else None,
            end=parse_datetime(d["end"]) if d.get("end") else None,
        )


@dataclass(frozen=True)
class Introductions:
    """Entities/relations an event brings into the child graph, with their
    abstract-graph mappings (None marks an exception for expert review)."""

    entities: tuple[Entity, ...] = ()
    relations: tuple[RelationType, ...] = ()
    entity_map: tuple[tuple[str, str | None], ...] = ()

    def to_dict(self) -> dict:
        return {
            "entities": [e.to_dict() for e in self.entities],
            "relations": [r.to_dict() for r in self.relations],
            "entity_map": {k: v for k, v in self.entity_map},
        }

    @classmethod
    def from_dict(cls, d: dict) -> Introductions:
        return cls(
            entities=tuple(Entity.from_dict(e) for e in d.get("entities", [])),
            relations=tuple(RelationType.from_dict(r) for r in d.get("relations", [])),
            entity_map=tuple(sorted(d.get("entity_map", {}).items())),
        )


@dataclass(frozen=True)
class TemporalTriple:
    """One dated event in a child graph.

    ``tombstone_of`` marks a retraction of an earlier event; the retracted
    event stays in the log. ``introduces`` carries graph additions needed to
    resolve this event's references on replay.
    """

    id: str
    triple: Triple
    time: TimeRef
    provenance: Provenance
    created_at: datetime
    tombstone_of: str | None = None
    introduces: Introductions | None = None

    def __post_init__(self):
        object.__setattr__(self, "created_at", _clip_minute(self.created_at))

    def to_dict(self) -> dict:
        d = {
            "id": self.id,
            "subject": self.triple.subject,
            "relation": self.triple.relation,
            "object": self.triple.object,
            "time": self.time.to_dict(),
            "provenance": self.provenance.value,
            "created_at": self.created_at.isoformat(),
        }
        if self.tombstone_of is not None:
            d["tombstone_of"] = self.tombstone_of
        if self.introduces is not None:
            d["introduces"] = self.introduces.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> TemporalTriple:
        return cls(
            id=d["id"],
            triple=Triple.from_dict(d),
            time=TimeRef.from_dict(d["time"]),
            provenance=Provenance(d["provenance"]),
            created_at=parse_datetime(d["created_at"]),
            tombstone_of=d.get("tombstone_of"),
            introduces=Introductions.from_dict(d["introduces"]) if d.get("introduces") else None,
        )


@dataclass
class AbstractEdge:
    """A stressor triple in the abstract graph, optionally tied to a scenario
    and to a distribution over support-statement categories."""

    triple: Triple
    scenario_id: str | None = None
    category_distribution: dict[str, float] = field(default_factory=dict)

    @property
    def key(self) -> str:
        t = self.triple
        return f"{t.subject}|{t.relation}|{t.object}"

    def validate_distribution(self):
        if self.category_distribution:
            total = sum(self.category_distribution.values())
            if abs(total - 1.0) > 1e-9:
                raise IntegrityError(f"edge {self.key}: category weights sum to {total}, not 1")
            if any(w < 0 or w > 1 for w in self.category_distribution.values()):
                raise IntegrityError(f"edge {self.key}: category weight outside [0,1]")

    def to_dict(self) -> dict:
        d = self.triple.to_dict()
        if self.scenario_id is not None:
            d["scenario_id"] = self.scenario_id
        if self.category_distribution:
            d["category_distribution"] = dict(sorted(self.category_distribution.items()))
        return d

    @classmethod
    def from_dict(cls, d: dict) -> AbstractEdge:
        return cls(
            triple=Triple.from_dict(d),
            scenario_id=d.get("scenario_id"),
            category_distribution=dict(d.get("category_distribution", {})),
        )


@dataclass(frozen=True)
class Scenario:
    """A distressing situation derived from a negative abstract edge."""

    id: str
    edge_key: str
    prompt_text: str

    def to_dict(self) -> dict:
        return {"id": self.id, "edge_key": self.edge_key, "prompt_text": self.prompt_text}


@dataclass(frozen=True)
class TripleText:
    """The surface labels of a triple; the unit the matcher operates on."""

    subject: str
    relation: str
    object: str

    def to_dict(self) -> dict:
        return {"subject": self.subject, "relation": self.relation, "object": self.object}


class AbstractKG:
    """The expert-curated ground-truth graph. Mutations bump ``version``."""

    def __init__(
        self,
        entities: dict[str, Entity] | None = None,
        relations: dict[str, RelationType] | None = None,
        edges: list[AbstractEdge] | None = None,
        version: int = 0,
    ):
        self.entities = dict(entities or {})
        self.relations = dict(relations or {})
        self.edges = list(edges or [])
        self.version = version
        self.validate()

    def validate(self):
        seen = set()
        for edge in self.edges:
            t = edge.triple
            for role, eid in (("subject", t.subject), ("object", t.object)):
                if eid not in self.entities:
                    raise IntegrityError(f"edge {edge.key}: {role} references undeclared entity {eid!r}")
            if t.relation not in self.relations:
                raise IntegrityError(f"edge {edge.key}: references undeclared relation {t.relation!r}")
            if edge.key in seen:
                raise IntegrityError(f"duplicate edge {edge.key}")
            seen.add(edge.key)
            edge.validate_distribution()

    def edge_by_key(self, key: str) -> AbstractEdge:
        for edge in self.edges:
            if edge.key == key:
                return edge
        raise NotFoundError(f"no abstract edge {key!r}")

    def edge_text(self, edge: AbstractEdge) -> TripleText:
        t = edge.triple
        return TripleText(
            subject=self.entities[t.subject].label,
            relation=self.relations[t.relation].label,
            object=self.entities[t.object].label,
        )

    def negative_edges(self) -> list[AbstractEdge]:
        return [e for e in self.edges if self.relations[e.triple.relation].polarity is Polarity.NEGATIVE]

    def scenario_edge(self, scenario_id: str) -> AbstractEdge:
        for edge in self.edges:
            if edge.scenario_id == scenario_id:
                return edge
        raise NotFoundError(f"no edge carries scenario {scenario_id!r}")

    def bump(self):
        self.version += 1

    def copy(self) -> AbstractKG:
        return AbstractKG(
            entities=dict(self.entities),
            relations=dict(self.relations),
            edges=[replace(e, category_distribution=dict(e.category_distribution)) for e in self.edges],
            version=self.version,
        )

    def to_dict(self) -> dict:
        return {
            "entities": [e.to_dict() for e in sorted(self.entities.values(), key=lambda e: e.id)],
            "relations": [r.to_dict() for r in sorted(self.relations.values(), key=lambda r: r.id)],
            "edges": [e.to_dict() for e in self.edges],
            "version": self.version,
        }

    @classmethod
    def from_dict(cls, d: dict) -> AbstractKG:
        entities = {}
        for i, ed in enumerate(d.get("entities", [])):
            e = Entity.from_dict(ed)
            if e.id in entities:
                raise IntegrityError(f"entities[{i}]: duplicate entity id {e.id!r}")
            entities[e.id] = e
        relations = {}
        for i, rd in enumerate(d.get("relations", [])):
            r = RelationType.from_dict(rd)
            if r.id in relations:
                raise IntegrityError(f"relations[{i}]: duplicate relation id {r.id!r}")
            relations[r.id] = r
        edges = [AbstractEdge.from_dict(ed) for ed in d.get("edges", [])]
        return cls(entities=entities, relations=relations, edges=edges, version=int(d.get("version", 0)))


def map_intake_entity(entity: Entity, abstract: AbstractKG) -> str | None:
    """Map a child entity onto the abstract graph, or return None (exception).

    Exact rule: normalized-label match first (same-type matches preferred),
    then a type-level placeholder whose label names the entity's own type.
    Anything fuzzier is left to the expert.
    """
    label = normalize_label(entity.label)
    label_hits = [a for a in abstract.entities.values() if normalize_label(a.label) == label]
    if label_hits:
        same_type = [a for a in label_hits if a.entity_type is entity.entity_type]
        pool = same_type or label_hits
        return min(pool, key=lambda a: a.id).id
    placeholders = [
        a
        for a in abstract.entities.values()
        if a.entity_type is entity.entity_type and normalize_label(a.label) == a.entity_type.value
    ]
    if placeholders:
        return min(placeholders, key=lambda a: a.id).id
    return None


class ChildTKG:
    """A child's temporal graph: entities, an append-only event log, and a
    total mapping of local entities to abstract ones (None = exception)."""

    def __init__(self, child_id: str):
        self.child_id = child_id
        self.entities: dict[str, Entity] = {}
        self.relations: dict[str, RelationType] = {}
        self.events: list[TemporalTriple] = []
        self.entity_map: dict[str, str | None] = {}
        self.tombstoned: set[str] = set()
        self.version = 0
        self._event_ids: set[str] = set()

    def add_entity(self, entity: Entity, mapping: str | None):
        if entity.id in self.entities:
            raise ConflictError(f"entity {entity.id!r} already present")
        self.entities[entity.id] = entity
        self.entity_map[entity.id] = mapping
        self.version += 1

    def add_relation(self, relation: RelationType):
        if relation.id in self.relations:
            raise ConflictError(f"relation {relation.id!r} already present")
        self.relations[relation.id] = relation
        self.version += 1

    def set_mapping(self, entity_id: str, abstract_id: str | None):
        if entity_id not in self.entities:
            raise NotFoundError(f"unknown entity {entity_id!r}")
        self.entity_map[entity_id] = abstract_id
        self.version += 1

    def append_event(self, event: TemporalTriple):
        """Append one event; applies its introductions first, then validates
        references and the monotone created_at invariant."""
        if event.id in self._event_ids:
            raise ConflictError(f"event id {event.id!r} already in the log")
        if self.events and event.created_at < self.events[-1].created_at:
            raise IntegrityError(
                f"event {event.id!r}: created_at precedes the last logged event"
            )
        if event.introduces is not None:
            mapping = dict(event.introduces.entity_map)
            for ent in event.introduces.entities:
                if ent.id not in self.entities:
                    if ent.id not in mapping:
                        raise IntegrityError(f"introduced entity {ent.id!r} has no mapping record")
                    self.entities[ent.id] = ent
                    self.entity_map[ent.id] = mapping[ent.id]
            for rel in event.introduces.relations:
                if rel.id not in self.relations:
                    self.relations[rel.id] = rel
        t = event.triple
        for role, eid in (("subject", t.subject), ("object", t.object)):
            if eid not in self.entities:
                raise IntegrityError(f"event {event.id!r}: {role} references unknown entity {eid!r}")
        if t.relation not in self.relations:
            raise IntegrityError(f"event {event.id!r}: unknown relation {t.relation!r}")
        if event.tombstone_of is not None:
            if event.tombstone_of not in self._event_ids:
                raise NotFoundError(f"tombstone targets unknown event {event.tombstone_of!r}")
            self.tombstoned.add(event.tombstone_of)
        self.events.append(event)
        self._event_ids.add(event.id)
        self.version += 1

    def live_events(self) -> list[TemporalTriple]:
        return [e for e in self.events if e.id not in self.tombstoned and e.tombstone_of is None]

    def event_by_id(self, event_id: str) -> TemporalTriple:
        for e in self.events:
            if e.id == event_id:
                return e
        raise NotFoundError(f"unknown event {event_id!r}")

    def event_text(self, event: TemporalTriple) -> TripleText:
        t = event.triple
        return TripleText(
            subject=self.entities[t.subject].label,
            relation=self.relations[t.relation].label,
            object=self.entities[t.object].label,
        )

    def exceptions(self) -> list[str]:
        return sorted(eid for eid, abs_id in self.entity_map.items() if abs_id is None)

    def to_dict(self) -> dict:
        return {
            "child_id": self.child_id,
            "entities": [e.to_dict() for e in sorted(self.entities.values(), key=lambda e: e.id)],
            "relations": [r.to_dict() for r in sorted(self.relations.values(), key=lambda r: r.id)],
            "events": [e.to_dict() for e in self.events],
            "entity_map": dict(sorted(self.entity_map.items())),
            "version": self.version,
        }

    @classmethod
    def from_dict(cls, d: dict) -> ChildTKG:
        tkg = cls(child_id=d["child_id"])
        for ed in d.get("entities", []):
            e = Entity.from_dict(ed)
            tkg.entities[e.id] = e
        for rd in d.get("relations", []):
            r = RelationType.from_dict(rd)
            tkg.relations[r.id] = r
        tkg.entity_map = dict(d.get("entity_map", {}))
        for evd in d.get("events", []):
            ev = TemporalTriple.from_dict(evd)
            tkg.events.append(ev)
            tkg._event_ids.add(ev.id)
            if ev.tombstone_of is not None:
                tkg.tombstoned.add(ev.tombstone_of)
        tkg.version = int(d.get("version", 0))
        missing = set(tkg.entities) - set(tkg.entity_map)
        if missing:
            raise IntegrityError(f"entities without mapping records: {sorted(missing)}")
        return tkg

    def canonical_bytes(self) -> bytes:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":")).encode()


def init_child_tkg(child_id: str, intake_entities: list[Entity], abstract: AbstractKG) -> ChildTKG:
    """Instantiate a child graph at intake; every entity gets a mapping record
    (an abstract match when the exact rule applies, otherwise an exception)."""
    tkg = ChildTKG(child_id)
    for entity in intake_entities:
        tkg.add_entity(entity, map_intake_entity(entity, abstract))
    tkg.version = 0
    return tkg
