from eskg.engine.auth import AuthTable
from eskg.engine.engine import SessionTurnResult, SupportEngine
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
)

__all__ = [
    "ANSWERABLE_REASONS",
    "AuthTable",
    "CandidateTriple",
    "ChildState",
    "ClarificationQuestion",
    "EntityRef",
    "ModerationAction",
    "ModerationKind",
    "QuestionReason",
    "Record",
    "RelationRef",
    "Sentiment",
    "SessionTurnResult",
    "SupportEngine",
    "question_text",
]
