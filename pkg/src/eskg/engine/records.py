"""Session-loop domain types and the event-sourced per-child state.

Every mutation of a child's world (graph, usage log, questions, sessions,
audit) is a Record; ChildState.apply is the only mutation point, so state
equals the fold of its record log and crash recovery is replay.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum

from eskg.errors import ConflictError, IntegrityError, NotFoundError, ValidationError
from eskg.kg.model import (
    ChildTKG,
    Entity,
    EntityType,
    Introductions,
    Polarity,
    Provenance,
    RelationType,
    TemporalTriple,
    TimeRef,
    Triple,
)
from eskg.matching.selection import UsageLog


class Sentiment(str, Enum):
    NEGATIVE = "negative"
    NEUTRAL = "neutral"
    POSITIVE = "positive"
    AMBIGUOUS = "ambiguous"


@dataclass(frozen=True)
class EntityRef:
    """An entity as it arrives from a parsed utterance: label plus type,
    optionally pinned to an existing local id."""

    label: str
    entity_type: EntityType = EntityType.OTHER
    id: str | None = None

    def to_dict(self) -> dict:
        d = {"label": self.label, "entity_type": self.entity_type.value}
        if self.id:
            d["id"] = self.id
        return d

    @classmethod
    def from_dict(cls, d: dict) -> EntityRef:
        return cls(
            label=d["label"],
            entity_type=EntityType(d.get("entity_type", "other")),
            id=d.get("id"),
        )


@dataclass(frozen=True)
class RelationRef:
    label: str
    polarity: Polarity = Polarity.NEUTRAL
    id: str | None = None

    def to_dict(self) -> dict:
        d = {"label": self.label, "polarity": self.polarity.value}
        if self.id:
            d["id"] = self.id
        return d

    @classmethod
    def from_dict(cls, d: dict) -> RelationRef:
        return cls(
            label=d["label"],
            polarity=Polarity(d.get("polarity", "neutral")),
            id=d.get("id"),
        )


@dataclass(frozen=True)
class CandidateTriple:
    subject: EntityRef
    relation: RelationRef
    object: EntityRef
    time: TimeRef
    sentiment: Sentiment
    session_id: str

    def to_dict(self) -> dict:
        return {
            "subject": self.subject.to_dict(),
            "relation": self.relation.to_dict(),
            "object": self.object.to_dict(),
            "time": self.time.to_dict(),
            "sentiment": self.sentiment.value,
            "session_id": self.session_id,
        }

    @classmethod
    def from_dict(cls, d: dict) -> CandidateTriple:
        return cls(
            subject=EntityRef.from_dict(d["subject"]),
            relation=RelationRef.from_dict(d["relation"]),
            object=EntityRef.from_dict(d["object"]),
            time=TimeRef.from_dict(d["time"]),
            sentiment=Sentiment(d.get("sentiment", "neutral")),
            session_id=d["session_id"],
        )

    def text(self) -> str:
        return f"{self.subject.label} {self.relation.label} {self.object.label}"


class QuestionReason(str, Enum):
    MISSING_TIME = "missing_time"
    INCONSISTENT_TIME = "inconsistent_time"
    AMBIGUOUS_SENTIMENT = "ambiguous_sentiment"
    NO_ABSTRACT_MATCH = "no_abstract_match"
    NO_STATEMENT_AVAILABLE = "no_statement_available"


ANSWERABLE_REASONS = {
    QuestionReason.MISSING_TIME,
    QuestionReason.INCONSISTENT_TIME,
    QuestionReason.AMBIGUOUS_SENTIMENT,
}

_QUESTION_TEMPLATES = {
    QuestionReason.MISSING_TIME: "When did this happen: {text}?",
    QuestionReason.INCONSISTENT_TIME: (
        "The time of '{text}' conflicts with a corrected event. When did it really happen?"
    ),
    QuestionReason.AMBIGUOUS_SENTIMENT: "Was '{text}' a good thing or a bad thing for you?",
    QuestionReason.NO_ABSTRACT_MATCH: "Can you tell me more about '{text}'?",
    QuestionReason.NO_STATEMENT_AVAILABLE: (
        "No approved support statement covers '{text}' yet."
    ),
}


def question_text(reason: QuestionReason, candidate: CandidateTriple) -> str:
    return _QUESTION_TEMPLATES[reason].format(text=candidate.text())


@dataclass
class ClarificationQuestion:
    id: str
    reason: QuestionReason
    question_text: str
    candidate: CandidateTriple
    created_seq: int
    created_at: datetime
    status: str = "open"  # open | closed
    answer: dict | None = None
    answered_by: str | None = None

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "reason": self.reason.value,
            "question_text": self.question_text,
            "candidate": self.candidate.to_dict(),
            "created_seq": self.created_seq,
            "created_at": self.created_at.isoformat(),
            "status": self.status,
            "answer": self.answer,
            "answered_by": self.answered_by,
        }

    @classmethod
    def from_dict(cls, d: dict) -> ClarificationQuestion:
        from eskg.kg.model import parse_datetime

        return cls(
            id=d["id"],
            reason=QuestionReason(d["reason"]),
            question_text=d["question_text"],
            candidate=CandidateTriple.from_dict(d["candidate"]),
            created_seq=d["created_seq"],
            created_at=parse_datetime(d["created_at"]),
            status=d.get("status", "open"),
            answer=d.get("answer"),
            answered_by=d.get("answered_by"),
        )


class ModerationKind(str, Enum):
    ADD = "add"
    FIX = "fix"
    TOMBSTONE = "tombstone"
    RESOLVE_EXCEPTION = "resolve_exception"


@dataclass
class ModerationAction:
    actor: str
    kind: ModerationKind
    payload: dict
    applied_at: datetime | None = None

    def to_dict(self) -> dict:
        return {
            "actor": self.actor,
            "kind": self.kind.value,
            "payload": self.payload,
            "applied_at": self.applied_at.isoformat() if self.applied_at else None,
        }

    @classmethod
    def from_dict(cls, d: dict) -> ModerationAction:
        from eskg.kg.model import parse_datetime

        return cls(
            actor=d["actor"],
            kind=ModerationKind(d["kind"]),
            payload=dict(d.get("payload", {})),
            applied_at=parse_datetime(d["applied_at"]) if d.get("applied_at") else None,
        )


@dataclass(frozen=True)
class Record:
    """One replayable state change. ``seq`` is dense per child."""

    seq: int
    at: datetime
    kind: str
    payload: dict

    def to_line(self) -> str:
        return json.dumps(
            {"seq": self.seq, "at": self.at.isoformat(), "kind": self.kind, "payload": self.payload},
            sort_keys=True,
        )

    @classmethod
    def from_line(cls, line: str) -> Record:
        from eskg.kg.model import parse_datetime

        d = json.loads(line)
        return cls(seq=d["seq"], at=parse_datetime(d["at"]), kind=d["kind"], payload=d["payload"])


class ChildState:
    """Everything the engine knows about one child, foldable from records."""

    def __init__(self, child_id: str):
        self.child_id = child_id
        self.tkg = ChildTKG(child_id)
        self.usage = UsageLog(child_id)
        self.questions: dict[str, ClarificationQuestion] = {}
        self.closed_sessions: set[str] = set()
        self.audit: list[ModerationAction] = []
        self.entity_added_seq: dict[str, int] = {}
        self.seq = -1
        self.counters = {"ent": 0, "rel": 0, "ev": 0, "q": 0}

    # -- id allocation (engine side; apply() keeps counters in sync on replay)

    def next_id(self, prefix: str) -> str:
        self.counters[prefix] += 1
        return f"{prefix}-{self.counters[prefix]:04d}"

    def _sync_counter(self, identifier: str):
        prefix, _, num = identifier.rpartition("-")
        if prefix in self.counters and num.isdigit():
            self.counters[prefix] = max(self.counters[prefix], int(num))

    # -- record application

    def apply(self, record: Record):
        if record.seq != self.seq + 1:
            raise IntegrityError(
                f"record gap for child {self.child_id!r}: expected seq {self.seq + 1}, got {record.seq}"
            )
        handler = getattr(self, f"_apply_{record.kind}", None)
        if handler is None:
            raise ValidationError(f"unknown record kind {record.kind!r}")
        handler(record)
        self.seq = record.seq

    def _apply_init(self, record: Record):
        p = record.payload
        for ed in p["entities"]:
            entity = Entity.from_dict(ed)
            self.tkg.entities[entity.id] = entity
            self._sync_counter(entity.id)
            self.entity_added_seq[entity.id] = record.seq
        self.tkg.entity_map = dict(p["entity_map"])
        missing = set(self.tkg.entities) - set(self.tkg.entity_map)
        if missing:
            raise IntegrityError(f"init without mapping records for {sorted(missing)}")
        self.tkg.version = 0

    def _apply_event(self, record: Record):
        event = TemporalTriple.from_dict(record.payload["event"])
        self.tkg.append_event(event)
        self._sync_counter(event.id)
        if event.introduces:
            for entity in event.introduces.entities:
                self._sync_counter(entity.id)
                self.entity_added_seq.setdefault(entity.id, record.seq)
            for relation in event.introduces.relations:
                self._sync_counter(relation.id)

    def _apply_tombstone(self, record: Record):
        event = TemporalTriple.from_dict(record.payload["event"])
        if event.tombstone_of is None:
            raise ValidationError("tombstone record without a target")
        self.tkg.append_event(event)
        self._sync_counter(event.id)

    def _apply_map_entity(self, record: Record):
        self.tkg.set_mapping(record.payload["entity_id"], record.payload["abstract_id"])

    def _apply_question_open(self, record: Record):
        question = ClarificationQuestion.from_dict(record.payload["question"])
        if question.id in self.questions:
            raise ConflictError(f"question {question.id!r} already open")
        self.questions[question.id] = question
        self._sync_counter(question.id)

    def _apply_question_close(self, record: Record):
        p = record.payload
        question = self.questions.get(p["question_id"])
        if question is None:
            raise NotFoundError(f"unknown question {p['question_id']!r}")
        question.status = "closed"
        question.answer = p.get("answer")
        question.answered_by = p.get("answered_by")

    def _apply_usage(self, record: Record):
        from eskg.kg.model import parse_datetime

        self.usage.append(record.payload["statement_id"], parse_datetime(record.payload["at"]))

    def _apply_session_close(self, record: Record):
        self.closed_sessions.add(record.payload["session_id"])

    def _apply_moderation(self, record: Record):
        action = ModerationAction.from_dict(record.payload["action"])
        self.audit.append(action)

    # -- views

    def open_questions(self) -> list[ClarificationQuestion]:
        return sorted(
            (q for q in self.questions.values() if q.status == "open"),
            key=lambda q: q.created_seq,
        )

    def to_dict(self) -> dict:
        return {
            "schema_version": 1,
            "child_id": self.child_id,
            "seq": self.seq,
            "counters": dict(self.counters),
            "tkg": self.tkg.to_dict(),
            "usage": self.usage.to_dict(),
            "questions": [q.to_dict() for q in sorted(self.questions.values(), key=lambda q: q.id)],
            "closed_sessions": sorted(self.closed_sessions),
            "audit": [a.to_dict() for a in self.audit],
            "entity_added_seq": dict(sorted(self.entity_added_seq.items())),
        }

    @classmethod
    def from_dict(cls, d: dict) -> ChildState:
        from eskg.kg.model import parse_datetime

        state = cls(d["child_id"])
        state.seq = d["seq"]
        state.counters = dict(d["counters"])
        state.tkg = ChildTKG.from_dict(d["tkg"])
        state.usage = UsageLog(
            child_id=d["child_id"],
            entries=[
                (e["statement_id"], parse_datetime(e["at"])) for e in d["usage"]["entries"]
            ],
        )
        state.questions = {
            q["id"]: ClarificationQuestion.from_dict(q) for q in d.get("questions", [])
        }
        state.closed_sessions = set(d.get("closed_sessions", []))
        state.audit = [ModerationAction.from_dict(a) for a in d.get("audit", [])]
        state.entity_added_seq = dict(d.get("entity_added_seq", {}))
        return state

    def canonical_bytes(self) -> bytes:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":")).encode()


def utcnow() -> datetime:
    return datetime.now(timezone.utc).replace(second=0, microsecond=0)
