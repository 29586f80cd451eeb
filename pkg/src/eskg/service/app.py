"""HTTP surface for the engine: child lifecycle, session turns, moderation,
analytics reads, anonymized exports, and corpus operations."""

from __future__ import annotations

import threading
import uuid
from collections import defaultdict
from dataclasses import replace
from datetime import date as date_type
from pathlib import Path

from fastapi import Body, Depends, FastAPI, Query, Request
from fastapi.responses import JSONResponse

from eskg.analytics.patterns import mine_order_patterns
from eskg.analytics.stats import relation_stats
from eskg.analytics.tkge import Quadruple, train_temporal_model
from eskg.analytics.walks import anonymize_walk, sample_temporal_walk
from eskg.corpus.agreement import CategoryAnnotation, free_marginal_kappa
from eskg.corpus.categories import CATEGORY_COUNT, ESCategory
from eskg.corpus.io import save_corpus
from eskg.corpus.pipeline import (
    CorpusConfig,
    LikertAnnotation,
    Paraphrase,
    ReviewStatus,
    StatementDraft,
    classify_by_majority,
    ingest_paraphrases,
    likert_filter,
)
from eskg.engine.auth import AuthTable
from eskg.engine.engine import SupportEngine
from eskg.engine.records import (
    CandidateTriple,
    EntityRef,
    ModerationAction,
    ModerationKind,
    Sentiment,
)
from eskg.errors import (
    ConflictError,
    EskgError,
    IntegrityError,
    NotFoundError,
    ParseError,
    UnauthorizedError,
    UnknownSymbolError,
    ValidationError,
)
from eskg.fixtures import seed_abstract_kg, seed_corpus
from eskg.kg.io import load_abstract_kg
from eskg.kg.model import EntityType, TimeRef, TripleText
from eskg.matching.selection import explain
from eskg.service.config import ApiConfig
from eskg.service.persistence import ChildStore

SCHEMA_VERSION = 1

_STATUS_BY_CODE = {
    ParseError: 400,
    ValidationError: 422,
    IntegrityError: 422,
    NotFoundError: 404,
    UnknownSymbolError: 404,
    ConflictError: 409,
    UnauthorizedError: 403,
}


class UnauthenticatedError(EskgError):
    code = "unauthenticated"


def _status_for(exc: EskgError) -> int:
    if isinstance(exc, UnauthenticatedError):
        return 401
    for cls, status in _STATUS_BY_CODE.items():
        if isinstance(exc, cls):
            return status
    return 500


def build_runtime(config: ApiConfig) -> tuple[SupportEngine, ChildStore]:
    """Load graph/corpus/auth, open the store, and recover persisted children."""
    data_dir = Path(config.data_dir)
    data_dir.mkdir(parents=True, exist_ok=True)
    abstract = load_abstract_kg(config.abstract_kg) if config.abstract_kg else seed_abstract_kg()
    live_corpus = data_dir / "corpus.json"
    if live_corpus.exists():
        from eskg.corpus.io import load_corpus

        corpus = load_corpus(live_corpus)
    elif config.corpus:
        from eskg.corpus.io import load_corpus

        corpus = load_corpus(config.corpus)
    else:
        corpus = seed_corpus()
    auth = AuthTable.load(config.auth_table) if config.auth_table else AuthTable()
    store = ChildStore(data_dir, snapshot_interval=config.snapshot_interval)
    engine = SupportEngine(abstract, corpus, config=config.matcher, auth=auth, sink=store.sink)
    store.bind(lambda child_id: engine.children[child_id])
    for child_id, state in store.recover_all().items():
        engine.attach(state)
    return engine, store


def create_app(
    config: ApiConfig | None = None,
    engine: SupportEngine | None = None,
    store: ChildStore | None = None,
) -> FastAPI:
    config = config or ApiConfig()
    if engine is None or store is None:
        engine, store = build_runtime(config)

    app = FastAPI(title="eskg service", version="0.1.0")
    app.state.engine = engine
    app.state.store = store
    app.state.config = config
    app.state.locks = defaultdict(threading.Lock)
    app.state.corpus_lock = threading.Lock()
    app.state.model_cache = {}

    @app.exception_handler(EskgError)
    def _eskg_error(request: Request, exc: EskgError):
        status = _status_for(exc)
        return JSONResponse(
            status_code=status,
            content={
                "status": status,
                "code": exc.code,
                "message": str(exc),
                "correlation_id": str(uuid.uuid4()),
            },
        )

    def current_actor(request: Request) -> str | None:
        if engine.auth.open_mode:
            return None
        header = request.headers.get("authorization", "")
        token = header.removeprefix("Bearer ").strip() if header.startswith("Bearer ") else None
        actor = engine.auth.actor_for_token(token)
        if actor is None:
            raise UnauthenticatedError("missing or unknown bearer token")
        return actor

    def ok(payload: dict, status: int = 200) -> JSONResponse:
        return JSONResponse(status_code=status, content={"schema_version": SCHEMA_VERSION, **payload})

    def persist_corpus():
        save_corpus(engine.corpus, Path(config.data_dir) / "corpus.json")

    # -- health and metadata

    @app.get("/health")
    def health():
        return {"status": "ok", "schema_version": SCHEMA_VERSION}

    @app.get("/abstract")
    def abstract_graph(actor: str | None = Depends(current_actor)):
        return ok({"abstract_kg": engine.scored_abstract.to_dict()})

    # -- children lifecycle

    @app.post("/children", status_code=201)
    def create_child(payload: dict = Body(...), actor: str | None = Depends(current_actor)):
        child_id = payload.get("child_id")
        if not child_id or not isinstance(child_id, str):
            raise ValidationError("child_id is required")
        intake = [_entity_ref(e) for e in payload.get("entities", [])]
        state = engine.create_child(child_id, intake)
        return ok(
            {
                "child_id": child_id,
                "entity_map": dict(sorted(state.tkg.entity_map.items())),
                "exceptions": state.tkg.exceptions(),
            },
            status=201,
        )

    @app.get("/children")
    def list_children(actor: str | None = Depends(current_actor)):
        return ok({"children": sorted(engine.children)})

    @app.get("/children/{child_id}")
    def child_summary(child_id: str, actor: str | None = Depends(current_actor)):
        state = engine._state(child_id)
        return ok(
            {
                "child_id": child_id,
                "version": state.tkg.version,
                "entities": len(state.tkg.entities),
                "events": len(state.tkg.events),
                "live_events": len(state.tkg.live_events()),
                "open_questions": len(state.open_questions()),
                "exceptions": state.tkg.exceptions(),
                "closed_sessions": sorted(state.closed_sessions),
            }
        )

    @app.get("/children/{child_id}/events")
    def child_events(
        child_id: str,
        relation: str | None = None,
        provenance: str | None = None,
        outlier_threshold: float = Query(default=2.0),
        actor: str | None = Depends(current_actor),
    ):
        state = engine._state(child_id)
        tkg = state.tkg
        outliers: set[str] = set()
        for rel_id in tkg.relations:
            stats = relation_stats(tkg, rel_id, outlier_threshold)
            outliers.update(
                eid for eid, flag in zip(stats.event_ids, stats.outlier_flags) if flag
            )
        events = []
        for event in tkg.events:
            if relation and event.triple.relation != relation:
                continue
            if provenance and event.provenance.value != provenance:
                continue
            text = tkg.event_text(event)
            events.append(
                {
                    **event.to_dict(),
                    "labels": text.to_dict(),
                    "tombstoned": event.id in tkg.tombstoned,
                    "outlier": event.id in outliers,
                }
            )
        return ok({"child_id": child_id, "events": events})

    # -- session turns and clarifications

    @app.post("/children/{child_id}/turns")
    def ingest_turn(child_id: str, payload: dict = Body(...), actor: str | None = Depends(current_actor)):
        candidates = [_candidate(c) for c in payload.get("candidates", [])]
        seed = int(payload.get("seed", 0))
        with app.state.locks[child_id]:
            result = engine.ingest_turn(child_id, candidates, seed=seed)
        return ok({"result": result.to_dict()})

    @app.post("/children/{child_id}/sessions/{session_id}/close")
    def close_session(child_id: str, session_id: str, actor: str | None = Depends(current_actor)):
        with app.state.locks[child_id]:
            engine.close_session(child_id, session_id)
        return ok({"child_id": child_id, "session_id": session_id, "closed": True})

    @app.post("/children/{child_id}/clarifications/{question_id}")
    def resolve_clarification(
        child_id: str,
        question_id: str,
        payload: dict = Body(...),
        actor: str | None = Depends(current_actor),
    ):
        answer = _answer(payload)
        seed = int(payload.get("seed", 0))
        who = actor or payload.get("actor", "robot")
        with app.state.locks[child_id]:
            result = engine.resolve_clarification(child_id, question_id, answer, actor=who, seed=seed)
        return ok({"result": result.to_dict()})

    # -- moderation and queues

    @app.post("/children/{child_id}/moderation")
    def moderate(child_id: str, payload: dict = Body(...), actor: str | None = Depends(current_actor)):
        try:
            kind = ModerationKind(payload.get("kind"))
        except ValueError:
            raise ValidationError(f"unknown moderation kind {payload.get('kind')!r}") from None
        action = ModerationAction(
            actor=actor or payload.get("actor", ""),
            kind=kind,
            payload=payload.get("payload", {}),
        )
        with app.state.locks[child_id]:
            effect = engine.apply_moderation(child_id, action)
        return ok({"applied": effect, "audit_entries": len(engine._state(child_id).audit)})

    @app.get("/children/{child_id}/exceptions")
    def exceptions(child_id: str, actor: str | None = Depends(current_actor)):
        return ok({"child_id": child_id, "queue": engine.exception_queue(child_id)})

    # -- analytics reads

    @app.get("/children/{child_id}/stats")
    def stats(
        child_id: str,
        relation: str,
        outlier_threshold: float = Query(default=2.0),
        actor: str | None = Depends(current_actor),
    ):
        state = engine._state(child_id)
        return ok({"stats": relation_stats(state.tkg, relation, outlier_threshold).to_dict()})

    @app.get("/children/{child_id}/patterns")
    def patterns(
        child_id: str,
        max_lag_days: float = Query(default=7.0),
        min_support: int = Query(default=1),
        actor: str | None = Depends(current_actor),
    ):
        state = engine._state(child_id)
        found = mine_order_patterns(state.tkg, max_lag_days, min_support)
        return ok(
            {
                "patterns": [p.to_dict() for p in found],
                "note": "patterns are correlational, not causal",
            }
        )

    def _model_for(child_id: str, seed: int):
        state = engine._state(child_id)
        key = (child_id, state.tkg.version, seed)
        cache = app.state.model_cache
        if key not in cache:
            if len(cache) >= 8:
                cache.pop(next(iter(cache)))
            cache[key] = train_temporal_model(
                state.tkg, replace(config.training, seed=seed)
            )
        return cache[key]

    @app.get("/children/{child_id}/predictions")
    def predictions(
        child_id: str,
        subject: str,
        relation: str,
        object: str,
        date: str,
        seed: int = Query(default=0),
        actor: str | None = Depends(current_actor),
    ):
        try:
            day = date_type.fromisoformat(date)
        except ValueError:
            raise ValidationError(f"bad date {date!r}, expected YYYY-MM-DD") from None
        model = _model_for(child_id, seed)
        quad = Quadruple(subject, relation, object, day)
        return ok(
            {
                "quadruple": quad.to_dict(),
                "plausibility": model.plausibility(quad),
                "distance": model.distance(quad),
                "loss_history": [model.loss_history[0], model.loss_history[-1]],
                "note": "model plausibility, not calibrated probability",
            }
        )

    def _default_walk_start(child_id: str) -> str:
        state = engine._state(child_id)
        child_entities = [
            e.id for e in state.tkg.entities.values() if e.entity_type is EntityType.CHILD
        ]
        if not child_entities:
            raise ValidationError("no child-typed entity to start the walk from; pass ?start=")
        return min(child_entities)

    @app.get("/children/{child_id}/walks")
    def walks(
        child_id: str,
        start: str | None = None,
        max_steps: int = Query(default=10),
        seed: int = Query(default=0),
        actor: str | None = Depends(current_actor),
    ):
        state = engine._state(child_id)
        start = start or _default_walk_start(child_id)
        walk = sample_temporal_walk(state.tkg, start, max_steps, seed)
        return ok({"walk": walk.to_dict()})

    @app.get("/children/{child_id}/export/anonymized")
    def export_anonymized(
        child_id: str,
        start: str | None = None,
        max_steps: int = Query(default=10),
        seed: int = Query(default=0),
        actor: str | None = Depends(current_actor),
    ):
        state = engine._state(child_id)
        start = start or _default_walk_start(child_id)
        walk = sample_temporal_walk(state.tkg, start, max_steps, seed)
        anonymized = anonymize_walk(walk, seed=seed)
        # to_dict never carries the pseudonym map; asserting the contract here
        # keeps a regression from ever shipping labels.
        body = anonymized.to_dict()
        assert "pseudonym_map" not in body
        return ok({"export": body})

    # -- matching probe

    @app.post("/match")
    def match(payload: dict = Body(...), actor: str | None = Depends(current_actor)):
        for fieldname in ("subject", "relation", "object"):
            if not payload.get(fieldname):
                raise ValidationError(f"{fieldname} is required")
        triple = TripleText(payload["subject"], payload["relation"], payload["object"])
        seed = int(payload.get("seed", 0))
        result, statement = engine.probe_selection(triple, seed=seed, child_id=payload.get("child_id"))
        justification = (
            explain(result, statement).to_dict() if statement is not None else None
        )
        return ok(
            {
                "match": result.to_dict(),
                "statement": statement.to_dict() if statement else None,
                "justification": justification,
            }
        )

    # -- corpus operations

    @app.get("/corpus")
    def corpus_doc(actor: str | None = Depends(current_actor)):
        return ok({"corpus": engine.corpus.to_dict()})

    @app.get("/corpus/pending")
    def corpus_pending(actor: str | None = Depends(current_actor)):
        return ok({"pending": [s.to_dict() for s in engine.corpus.pending()]})

    @app.post("/corpus/review")
    def corpus_review(payload: dict = Body(...), actor: str | None = Depends(current_actor)):
        statement_id = payload.get("statement_id")
        try:
            verdict = ReviewStatus(payload.get("verdict"))
        except ValueError:
            raise ValidationError("verdict must be approved or rejected") from None
        with app.state.corpus_lock:
            statement = engine.review_statement(statement_id, verdict)
            persist_corpus()
        return ok({"statement": statement.to_dict()})

    @app.post("/corpus/augment")
    def corpus_augment(payload: dict = Body(...), actor: str | None = Depends(current_actor)):
        paraphrases = [
            Paraphrase(id=p["id"], source_id=p["source_id"], text=p["text"])
            for p in payload.get("paraphrases", [])
        ]
        with app.state.corpus_lock:
            ingest_paraphrases(engine.corpus, paraphrases)
            engine.rescore()
            persist_corpus()
        return ok({"added": len(paraphrases), "pending": [s.to_dict() for s in engine.corpus.pending()]})

    @app.post("/corpus/validate")
    def corpus_validate(payload: dict = Body(...), actor: str | None = Depends(current_actor)):
        config_ = CorpusConfig.from_dict(payload.get("config", {}))
        drafts = [_draft(d) for d in payload.get("drafts", [])]
        ratings = [
            LikertAnnotation(r["statement_id"], r["rater_id"], int(r["rating"]))
            for r in payload.get("ratings", [])
        ]
        result = likert_filter(drafts, ratings, config_)
        return ok(
            {
                "kept": [
                    {"id": rd.draft.id, "mean": rd.mean, "sd": rd.sd} for rd in result.kept
                ],
                "excluded": [
                    {"id": ex.draft.id, "reasons": ex.reasons, "mean": ex.mean, "sd": ex.sd}
                    for ex in result.excluded
                ],
                "under_annotated": [d.id for d in result.under_annotated],
            }
        )

    @app.post("/corpus/classify")
    def corpus_classify(payload: dict = Body(...), actor: str | None = Depends(current_actor)):
        config_ = CorpusConfig.from_dict(payload.get("config", {}))
        drafts = [_draft(d) for d in payload.get("drafts", [])]
        ratings = [
            LikertAnnotation(r["statement_id"], r["rater_id"], int(r["rating"]))
            for r in payload.get("ratings", [])
        ]
        categories = [
            CategoryAnnotation(c["statement_id"], c["rater_id"], _category(c["category"]))
            for c in payload.get("categories", [])
        ]
        filtered = likert_filter(drafts, ratings, config_)
        report = free_marginal_kappa(
            [c for c in categories if c.statement_id in {rd.draft.id for rd in filtered.kept}],
            k=CATEGORY_COUNT,
        )
        classified = classify_by_majority(filtered.kept, categories, report, config_)
        return ok(
            {
                "validated": [s.to_dict() for s in classified.validated],
                "excluded": [
                    {"id": ex.draft.id, "reasons": ex.reasons} for ex in classified.excluded
                ]
                + [
                    {"id": ex.draft.id, "reasons": ex.reasons} for ex in filtered.excluded
                ],
                "under_annotated": [d.id for d in filtered.under_annotated],
                "report": report.to_dict(),
            }
        )

    return app


# -- request parsing helpers


def _entity_ref(d: dict) -> EntityRef:
    try:
        return EntityRef(
            label=d["label"],
            entity_type=EntityType(d.get("entity_type", "other")),
            id=d.get("id"),
        )
    except KeyError as exc:
        raise ValidationError(f"entity is missing field {exc}") from exc
    except ValueError as exc:
        raise ValidationError(str(exc)) from exc


def _candidate(d: dict) -> CandidateTriple:
    try:
        return CandidateTriple.from_dict(d)
    except KeyError as exc:
        raise ValidationError(f"candidate is missing field {exc}") from exc
    except ValueError as exc:
        raise ValidationError(str(exc)) from exc


def _answer(payload: dict) -> TimeRef | Sentiment:
    if "time" in payload:
        try:
            return TimeRef.from_dict(payload["time"])
        except (KeyError, ValueError) as exc:
            raise ValidationError(f"bad time answer: {exc}") from exc
    if "sentiment" in payload:
        try:
            return Sentiment(payload["sentiment"])
        except ValueError as exc:
            raise ValidationError(str(exc)) from exc
    raise ValidationError("answer must carry either 'time' or 'sentiment'")


def _draft(d: dict) -> StatementDraft:
    try:
        return StatementDraft(
            id=d["id"], scenario_id=d["scenario_id"], text=d["text"], author_id=d.get("author_id", "")
        )
    except KeyError as exc:
        raise ValidationError(f"draft is missing field {exc}") from exc


def _category(code: str) -> ESCategory:
    try:
        return ESCategory(code)
    except ValueError:
        raise ValidationError(f"unknown category {code!r}") from None
