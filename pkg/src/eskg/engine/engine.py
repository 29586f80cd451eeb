"""The session loop: candidate ingestion, clarification, moderation.

All state changes funnel through ChildState.apply via _commit, so a record
sink (the persistence layer) sees exactly what happened, in order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import datetime

from eskg.corpus.pipeline import Corpus, ValidatedStatement, edge_category_distribution, expert_review
from eskg.engine.auth import AuthTable
from eskg.engine.records import (
    ANSWERABLE_REASONS,
    CandidateTriple,
    ChildState,
    ClarificationQuestion,
    EntityRef,
    ModerationAction,
    ModerationKind,
    QuestionReason,
    Record,
    RelationRef,
    Sentiment,
    question_text,
    utcnow,
)
from eskg.errors import ConflictError, NotFoundError, UnauthorizedError, ValidationError
from eskg.kg.model import (
    AbstractKG,
    Entity,
    Introductions,
    Provenance,
    RelationType,
    TemporalTriple,
    TimeRef,
    Triple,
    TripleText,
    map_intake_entity,
    normalize_label,
)
from eskg.matching.matcher import MatcherConfig, MatchResult, TripleMatcher
from eskg.matching.selection import Justification, UsageLog, choose_statement, explain


@dataclass
class SessionTurnResult:
    appended_event_ids: list[str]
    statement: ValidatedStatement | None
    questions: list[ClarificationQuestion]
    justification: Justification | None
    rejected: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "appended_event_ids": self.appended_event_ids,
            "statement": self.statement.to_dict() if self.statement else None,
            "questions": [q.to_dict() for q in self.questions],
            "justification": self.justification.to_dict() if self.justification else None,
            "rejected": self.rejected,
        }


def _ranges_overlap(a: TimeRef, b: TimeRef) -> bool:
    a_end = a.end if a.end is not None else a.start
    b_end = b.end if b.end is not None else b.start
    return a.start <= b_end and b.start <= a_end


class SupportEngine:
    def __init__(
        self,
        abstract: AbstractKG,
        corpus: Corpus,
        config: MatcherConfig | None = None,
        auth: AuthTable | None = None,
        clock=None,
        sink=None,
    ):
        self.abstract = abstract
        self.corpus = corpus
        self.config = config or MatcherConfig()
        self.auth = auth or AuthTable()
        self.children: dict[str, ChildState] = {}
        self._clock = clock or utcnow
        self._sink = sink
        self.rescore()

    # -- corpus/abstract coupling

    def rescore(self):
        """Recompute edge category weights from the current corpus and refit
        the matcher. Call after any corpus change."""
        self.scored_abstract = edge_category_distribution(self.corpus, self.abstract)
        self.matcher = TripleMatcher(self.config).fit(self.scored_abstract)

    def review_statement(self, statement_id: str, verdict) -> ValidatedStatement:
        expert_review(self.corpus, statement_id, verdict)
        self.rescore()
        return self.corpus.get(statement_id)

    # -- plumbing

    def _state(self, child_id: str) -> ChildState:
        state = self.children.get(child_id)
        if state is None:
            raise NotFoundError(f"unknown child {child_id!r}")
        return state

    def _commit(self, state: ChildState, kind: str, payload: dict) -> Record:
        record = Record(seq=state.seq + 1, at=self._clock(), kind=kind, payload=payload)
        state.apply(record)
        if self._sink is not None:
            self._sink(state.child_id, record)
        return record

    def attach(self, state: ChildState):
        """Adopt a recovered state (no records emitted)."""
        if state.child_id in self.children:
            raise ConflictError(f"child {state.child_id!r} already attached")
        self.children[state.child_id] = state

    # -- intake

    def create_child(self, child_id: str, intake: list[EntityRef]) -> ChildState:
        if child_id in self.children:
            raise ConflictError(f"child {child_id!r} already exists")
        state = ChildState(child_id)
        entities, mapping = [], {}
        for ref in intake:
            entity = Entity(
                id=ref.id or state.next_id("ent"), label=ref.label, entity_type=ref.entity_type
            )
            if entity.id in mapping:
                raise ConflictError(f"duplicate intake entity id {entity.id!r}")
            entities.append(entity)
            mapping[entity.id] = map_intake_entity(entity, self.abstract)
        self.children[child_id] = state
        try:
            self._commit(
                state,
                "init",
                {"entities": [e.to_dict() for e in entities], "entity_map": mapping},
            )
        except Exception:
            del self.children[child_id]
            raise
        return state

    # -- candidate resolution

    def _resolve_entity(self, state: ChildState, ref: EntityRef) -> tuple[str, Entity | None]:
        if ref.id is not None:
            if ref.id not in state.tkg.entities:
                raise NotFoundError(f"candidate pins unknown entity {ref.id!r}")
            return ref.id, None
        wanted = normalize_label(ref.label)
        for entity in sorted(state.tkg.entities.values(), key=lambda e: e.id):
            if normalize_label(entity.label) == wanted and entity.entity_type is ref.entity_type:
                return entity.id, None
        entity = Entity(id=state.next_id("ent"), label=ref.label, entity_type=ref.entity_type)
        return entity.id, entity

    def _resolve_relation(self, state: ChildState, ref: RelationRef) -> tuple[str, RelationType | None]:
        if ref.id is not None:
            if ref.id not in state.tkg.relations:
                raise NotFoundError(f"candidate pins unknown relation {ref.id!r}")
            return ref.id, None
        wanted = normalize_label(ref.label)
        for relation in sorted(state.tkg.relations.values(), key=lambda r: r.id):
            if normalize_label(relation.label) == wanted:
                return relation.id, None
        relation = RelationType(id=state.next_id("rel"), label=ref.label, polarity=ref.polarity)
        return relation.id, relation

    def _next_created_at(self, state: ChildState) -> datetime:
        now = self._clock()
        if state.tkg.events:
            last = state.tkg.events[-1].created_at
            if now < last:
                return last
        return now

    def _append_candidate(
        self, state: ChildState, candidate: CandidateTriple, provenance: Provenance
    ) -> TemporalTriple:
        subject_id, new_subject = self._resolve_entity(state, candidate.subject)
        object_id, new_object = (
            (subject_id, None)
            if candidate.object == candidate.subject
            else self._resolve_entity(state, candidate.object)
        )
        relation_id, new_relation = self._resolve_relation(state, candidate.relation)
        new_entities = [e for e in (new_subject, new_object) if e is not None]
        introduces = None
        if new_entities or new_relation:
            introduces = Introductions(
                entities=tuple(new_entities),
                relations=(new_relation,) if new_relation else (),
                entity_map=tuple(
                    (e.id, map_intake_entity(e, self.abstract)) for e in new_entities
                ),
            )
        event = TemporalTriple(
            id=state.next_id("ev"),
            triple=Triple(subject=subject_id, relation=relation_id, object=object_id),
            time=candidate.time,
            provenance=provenance,
            created_at=self._next_created_at(state),
            introduces=introduces,
        )
        self._commit(state, "event", {"event": event.to_dict()})
        return event

    # -- ambiguity detection

    def _time_conflict(self, state: ChildState, candidate: CandidateTriple) -> bool:
        tkg = state.tkg
        labels = (
            normalize_label(candidate.subject.label),
            normalize_label(candidate.relation.label),
            normalize_label(candidate.object.label),
        )
        for event in tkg.events:
            if event.id not in tkg.tombstoned:
                continue
            text = tkg.event_text(event)
            if labels != (
                normalize_label(text.subject),
                normalize_label(text.relation),
                normalize_label(text.object),
            ):
                continue
            if event.time.is_known and _ranges_overlap(event.time, candidate.time):
                return True
        return False

    def _ambiguity(self, state: ChildState, candidate: CandidateTriple) -> QuestionReason | None:
        if not candidate.time.is_known:
            return QuestionReason.MISSING_TIME
        if self._time_conflict(state, candidate):
            return QuestionReason.INCONSISTENT_TIME
        if candidate.sentiment is Sentiment.AMBIGUOUS:
            return QuestionReason.AMBIGUOUS_SENTIMENT
        return None

    def _open_question(
        self, state: ChildState, reason: QuestionReason, candidate: CandidateTriple
    ) -> ClarificationQuestion:
        question = ClarificationQuestion(
            id=state.next_id("q"),
            reason=reason,
            question_text=question_text(reason, candidate),
            candidate=candidate,
            created_seq=state.seq + 1,
            created_at=self._clock(),
        )
        self._commit(state, "question_open", {"question": question.to_dict()})
        return question

    # -- the turn loop

    def ingest_turn(
        self, child_id: str, candidates: list[CandidateTriple], seed: int = 0
    ) -> SessionTurnResult:
        """Append what is unambiguous, ask about what is not, and dispense at
        most one support statement (highest-scoring match wins)."""
        state = self._state(child_id)
        for candidate in candidates:
            if candidate.session_id in state.closed_sessions:
                raise ConflictError(f"session {candidate.session_id!r} is closed")
        return self._ingest(state, candidates, seed)

    def _ingest(
        self, state: ChildState, candidates: list[CandidateTriple], seed: int
    ) -> SessionTurnResult:
        appended: list[str] = []
        questions: list[ClarificationQuestion] = []
        rejected: list[dict] = []
        matched: list[tuple[float, int, MatchResult, CandidateTriple]] = []
        for order, candidate in enumerate(candidates):
            reason = self._ambiguity(state, candidate)
            if reason is not None:
                questions.append(self._open_question(state, reason, candidate))
                continue
            try:
                event = self._append_candidate(state, candidate, Provenance.AUTOMATED)
            except NotFoundError as exc:
                rejected.append({"candidate": candidate.to_dict(), "reason": str(exc)})
                continue
            appended.append(event.id)
            result = self.matcher.match(state.tkg.event_text(event))
            if result.matched:
                matched.append((result.score, order, result, candidate))
            else:
                questions.append(
                    self._open_question(state, QuestionReason.NO_ABSTRACT_MATCH, candidate)
                )

        statement = justification = None
        if matched:
            matched.sort(key=lambda m: (-m[0], m[1]))
            _, _, best, best_candidate = matched[0]
            statement = choose_statement(best, self.corpus, state.usage, seed, self.config)
            if statement is None:
                questions.append(
                    self._open_question(state, QuestionReason.NO_STATEMENT_AVAILABLE, best_candidate)
                )
            else:
                self._commit(
                    state,
                    "usage",
                    {"statement_id": statement.id, "at": self._clock().isoformat()},
                )
                justification = explain(best, statement)
        return SessionTurnResult(
            appended_event_ids=appended,
            statement=statement,
            questions=questions,
            justification=justification,
            rejected=rejected,
        )

    # -- clarification

    def resolve_clarification(
        self,
        child_id: str,
        question_id: str,
        answer: TimeRef | Sentiment,
        actor: str = "robot",
        seed: int = 0,
    ) -> SessionTurnResult:
        """Complete the held candidate and re-run it through the turn loop.

        Re-delivering the identical answer to a closed question is a no-op;
        a different answer is a conflict.
        """
        state = self._state(child_id)
        question = state.questions.get(question_id)
        if question is None:
            raise NotFoundError(f"unknown question {question_id!r}")
        if question.reason not in ANSWERABLE_REASONS:
            raise ValidationError(
                f"question {question_id!r} ({question.reason.value}) is handled by the expert, not an answer"
            )
        payload = self._answer_payload(question.reason, answer)
        if question.status == "closed":
            if question.answer is not None and json.dumps(question.answer, sort_keys=True) == json.dumps(
                payload, sort_keys=True
            ):
                return SessionTurnResult([], None, [], None)
            raise ConflictError(f"question {question_id!r} is already answered")
        candidate = question.candidate
        if question.reason in (QuestionReason.MISSING_TIME, QuestionReason.INCONSISTENT_TIME):
            candidate = CandidateTriple(
                subject=candidate.subject,
                relation=candidate.relation,
                object=candidate.object,
                time=TimeRef.from_dict(payload["time"]),
                sentiment=candidate.sentiment,
                session_id=candidate.session_id,
            )
        else:
            candidate = CandidateTriple(
                subject=candidate.subject,
                relation=candidate.relation,
                object=candidate.object,
                time=candidate.time,
                sentiment=Sentiment(payload["sentiment"]),
                session_id=candidate.session_id,
            )
        self._commit(
            state,
            "question_close",
            {"question_id": question_id, "answer": payload, "answered_by": actor},
        )
        return self._ingest(state, [candidate], seed)

    @staticmethod
    def _answer_payload(reason: QuestionReason, answer: TimeRef | Sentiment) -> dict:
        if reason in (QuestionReason.MISSING_TIME, QuestionReason.INCONSISTENT_TIME):
            if not isinstance(answer, TimeRef) or not answer.is_known:
                raise ValidationError("this question needs a known time")
            return {"time": answer.to_dict()}
        if not isinstance(answer, Sentiment) or answer is Sentiment.AMBIGUOUS:
            raise ValidationError("this question needs a definite sentiment")
        return {"sentiment": answer.value}

    # -- moderation

    def apply_moderation(self, child_id: str, action: ModerationAction) -> dict:
        """Validates, applies the effect records, then logs exactly one audit
        entry. Unauthorized or dangling actions change nothing."""
        state = self._state(child_id)
        if not self.auth.authorized(action.actor, child_id):
            raise UnauthorizedError(f"actor {action.actor!r} may not moderate child {child_id!r}")
        effect: dict = {"kind": action.kind.value}
        if action.kind is ModerationKind.ADD:
            candidate = self._moderation_candidate(action.payload)
            event = self._append_candidate(state, candidate, Provenance.MANUAL)
            effect["event_id"] = event.id
        elif action.kind is ModerationKind.TOMBSTONE:
            effect["tombstone_id"] = self._tombstone(state, action.payload.get("target_event_id")).id
        elif action.kind is ModerationKind.FIX:
            candidate = self._moderation_candidate(action.payload.get("replacement") or {})
            tombstone = self._tombstone(state, action.payload.get("target_event_id"))
            event = self._append_candidate(state, candidate, Provenance.MANUAL)
            effect["tombstone_id"] = tombstone.id
            effect["event_id"] = event.id
        elif action.kind is ModerationKind.RESOLVE_EXCEPTION:
            entity_id = action.payload.get("entity_id")
            abstract_id = action.payload.get("abstract_id")
            if entity_id not in state.tkg.entities:
                raise NotFoundError(f"unknown entity {entity_id!r}")
            if abstract_id is not None and abstract_id not in self.abstract.entities:
                raise NotFoundError(f"unknown abstract entity {abstract_id!r}")
            self._commit(state, "map_entity", {"entity_id": entity_id, "abstract_id": abstract_id})
            effect["entity_id"] = entity_id
        else:  # pragma: no cover - enum is closed
            raise ValidationError(f"unknown moderation kind {action.kind!r}")
        action.applied_at = self._clock()
        self._commit(state, "moderation", {"action": action.to_dict()})
        return effect

    def _moderation_candidate(self, payload: dict) -> CandidateTriple:
        try:
            return CandidateTriple(
                subject=EntityRef.from_dict(payload["subject"]),
                relation=RelationRef.from_dict(payload["relation"]),
                object=EntityRef.from_dict(payload["object"]),
                time=TimeRef.from_dict(payload["time"]),
                sentiment=Sentiment(payload.get("sentiment", "neutral")),
                session_id=payload.get("session_id", "moderation"),
            )
        except KeyError as exc:
            raise ValidationError(f"moderation payload missing field {exc}") from exc

    def _tombstone(self, state: ChildState, target_event_id: str | None) -> TemporalTriple:
        if not target_event_id:
            raise ValidationError("moderation payload missing target_event_id")
        target = state.tkg.event_by_id(target_event_id)
        if target_event_id in state.tkg.tombstoned:
            raise ConflictError(f"event {target_event_id!r} is already tombstoned")
        if target.tombstone_of is not None:
            raise ValidationError("cannot tombstone a tombstone")
        event = TemporalTriple(
            id=state.next_id("ev"),
            triple=target.triple,
            time=target.time,
            provenance=Provenance.MANUAL,
            created_at=self._next_created_at(state),
            tombstone_of=target.id,
        )
        self._commit(state, "tombstone", {"event": event.to_dict()})
        return event

    # -- sessions and queues

    def close_session(self, child_id: str, session_id: str):
        state = self._state(child_id)
        if session_id in state.closed_sessions:
            raise ConflictError(f"session {session_id!r} is already closed")
        self._commit(state, "session_close", {"session_id": session_id})

    def exception_queue(self, child_id: str) -> list[dict]:
        """Open items for the expert, oldest first: unmapped entities plus
        open questions (answerable ones surface as clarifications)."""
        state = self._state(child_id)
        items = []
        for entity_id, abstract_id in state.tkg.entity_map.items():
            if abstract_id is not None:
                continue
            entity = state.tkg.entities[entity_id]
            items.append(
                {
                    "kind": "exception",
                    "ref": entity_id,
                    "seq": state.entity_added_seq.get(entity_id, 0),
                    "label": entity.label,
                    "entity_type": entity.entity_type.value,
                }
            )
        for question in state.open_questions():
            if question.reason in ANSWERABLE_REASONS:
                kind = "clarification"
            elif question.reason is QuestionReason.NO_STATEMENT_AVAILABLE:
                kind = "no_statement"
            else:
                kind = "exception"
            items.append(
                {
                    "kind": kind,
                    "ref": question.id,
                    "seq": question.created_seq,
                    "reason": question.reason.value,
                    "question_text": question.question_text,
                }
            )
        items.sort(key=lambda item: (item["seq"], item["ref"]))
        return items

    # -- probes

    def match_triple(self, triple: TripleText) -> MatchResult:
        return self.matcher.match(triple)

    def probe_selection(
        self, triple: TripleText, seed: int = 0, child_id: str | None = None
    ) -> tuple[MatchResult, ValidatedStatement | None]:
        """Match and tentatively select without logging usage."""
        result = self.matcher.match(triple)
        statement = None
        if result.matched:
            usage = self.children[child_id].usage if child_id in self.children else UsageLog("probe")
            statement = choose_statement(result, self.corpus, usage, seed, self.config)
        return result, statement
