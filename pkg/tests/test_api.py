import json

import pytest
from fastapi.testclient import TestClient

from eskg.analytics.tkge import TrainingConfig
from eskg.service.app import create_app
from eskg.service.config import ApiConfig

LEE = {"Authorization": "Bearer tok-lee"}
KIM = {"Authorization": "Bearer tok-kim"}


def write_auth(tmp_path):
    path = tmp_path / "auth.json"
    path.write_text(
        json.dumps(
            {
                "tokens": {"tok-lee": "dr-lee", "tok-kim": "dr-kim"},
                "assignments": {"dr-lee": ["*"], "dr-kim": ["someone-else"]},
            }
        )
    )
    return str(path)


def make_config(tmp_path, auth=False):
    return ApiConfig(
        data_dir=str(tmp_path / "data"),
        snapshot_interval=10,
        auth_table=write_auth(tmp_path) if auth else None,
        training=TrainingConfig(dim=8, epochs=40, seed=0),
    )


@pytest.fixture
def client(tmp_path):
    app = create_app(make_config(tmp_path))
    return TestClient(app)


@pytest.fixture
def auth_client(tmp_path):
    app = create_app(make_config(tmp_path, auth=True))
    return TestClient(app)


def intake_body(child_id="c1"):
    return {
        "child_id": child_id,
        "entities": [
            {"label": "Riley", "entity_type": "child"},
            {"label": "Rex", "entity_type": "other"},
        ],
    }


def turn_body(relation="refuses to go to", obj="school", obj_type="place",
              time=None, sentiment="negative", session="s1", seed=0):
    return {
        "seed": seed,
        "candidates": [
            {
                "subject": {"label": "Riley", "entity_type": "child"},
                "relation": {"label": relation},
                "object": {"label": obj, "entity_type": obj_type},
                "time": time or {"kind": "instant", "start": "2024-03-01T09:00:00+00:00"},
                "sentiment": sentiment,
                "session_id": session,
            }
        ],
    }


class TestChildren:
    def test_create_201_with_mapping(self, client):
        response = client.post("/children", json=intake_body())
        assert response.status_code == 201
        body = response.json()
        assert body["child_id"] == "c1"
        assert body["exceptions"] == ["ent-0002"]

    def test_duplicate_409(self, client):
        client.post("/children", json=intake_body())
        assert client.post("/children", json=intake_body()).status_code == 409

    def test_malformed_entity_type_422(self, client):
        bad = {"child_id": "c1", "entities": [{"label": "x", "entity_type": "martian"}]}
        response = client.post("/children", json=bad)
        assert response.status_code == 422
        assert response.json()["code"] == "invalid_input"
        assert "correlation_id" in response.json()

    def test_unknown_child_404(self, client):
        assert client.get("/children/ghost").status_code == 404


class TestTurns:
    def test_turn_emits_statement_with_justification(self, client):
        client.post("/children", json=intake_body())
        response = client.post("/children/c1/turns", json=turn_body(seed=5))
        assert response.status_code == 200
        result = response.json()["result"]
        assert len(result["appended_event_ids"]) == 1
        assert result["statement"] is not None
        assert result["justification"]["scenario_id"] == "scn-01"

    def test_undated_candidate_asks(self, client):
        client.post("/children", json=intake_body())
        response = client.post(
            "/children/c1/turns", json=turn_body(time={"kind": "unknown"})
        )
        result = response.json()["result"]
        assert result["appended_event_ids"] == []
        assert result["questions"][0]["reason"] == "missing_time"

    def test_closed_session_409(self, client):
        client.post("/children", json=intake_body())
        assert client.post("/children/c1/sessions/s1/close").status_code == 200
        assert client.post("/children/c1/turns", json=turn_body()).status_code == 409

    def test_clarification_roundtrip(self, client):
        client.post("/children", json=intake_body())
        held = client.post("/children/c1/turns", json=turn_body(time={"kind": "unknown"}))
        qid = held.json()["result"]["questions"][0]["id"]
        answered = client.post(
            f"/children/c1/clarifications/{qid}",
            json={"time": {"kind": "instant", "start": "2024-03-02T10:00:00+00:00"}},
        )
        assert answered.status_code == 200
        assert len(answered.json()["result"]["appended_event_ids"]) == 1
        again = client.post(
            f"/children/c1/clarifications/{qid}",
            json={"time": {"kind": "instant", "start": "2024-04-02T10:00:00+00:00"}},
        )
        assert again.status_code == 409


class TestModerationAuth:
    def test_requires_token_when_auth_enabled(self, auth_client):
        assert auth_client.post("/children", json=intake_body()).status_code == 401

    def test_assigned_actor_may_moderate(self, auth_client):
        auth_client.post("/children", json=intake_body(), headers=LEE)
        response = auth_client.post(
            "/children/c1/moderation",
            headers=LEE,
            json={
                "kind": "resolve_exception",
                "payload": {"entity_id": "ent-0002", "abstract_id": "a_friend"},
            },
        )
        assert response.status_code == 200
        assert response.json()["applied"]["entity_id"] == "ent-0002"

    def test_unassigned_actor_403(self, auth_client):
        auth_client.post("/children", json=intake_body(), headers=LEE)
        response = auth_client.post(
            "/children/c1/moderation",
            headers=KIM,
            json={
                "kind": "resolve_exception",
                "payload": {"entity_id": "ent-0002", "abstract_id": "a_friend"},
            },
        )
        assert response.status_code == 403


def seed_weekly_child(client, weeks=8):
    from datetime import date, timedelta

    client.post("/children", json=intake_body("cw"))
    start = date(2024, 1, 6)
    for week in range(weeks):
        saturday = start + timedelta(weeks=week)
        client.post(
            "/children/cw/turns",
            json=turn_body(
                relation="feels happy",
                obj="Riley",
                obj_type="child",
                sentiment="positive",
                time={"kind": "instant", "start": f"{saturday.isoformat()}T10:00:00+00:00"},
            ),
        )
        wednesday = saturday + timedelta(days=4)
        client.post(
            "/children/cw/turns",
            json=turn_body(
                relation="works on",
                obj="math homework",
                obj_type="object",
                sentiment="neutral",
                time={"kind": "instant", "start": f"{wednesday.isoformat()}T16:00:00+00:00"},
            ),
        )


class TestAnalyticsEndpoints:
    def test_stats_patterns_walks(self, client):
        seed_weekly_child(client)
        state = client.get("/children/cw").json()
        assert state["events"] >= 16

        stats = client.get("/children/cw/stats", params={"relation": "rel-0001"})
        assert stats.status_code == 200
        assert stats.json()["stats"]["count"] == 8

        patterns = client.get("/children/cw/patterns", params={"max_lag_days": 5})
        assert patterns.status_code == 200
        pairs = {(p["antecedent"], p["consequent"]) for p in patterns.json()["patterns"]}
        assert ("rel-0001", "rel-0002") in pairs  # happy Saturday then homework Wednesday

        walk = client.get("/children/cw/walks", params={"seed": 3, "max_steps": 4})
        assert walk.status_code == 200
        steps = walk.json()["walk"]["steps"]
        times = [s["time"]["start"] for s in steps]
        assert times == sorted(times)

    def test_predictions_separate_weekdays(self, client):
        seed_weekly_child(client)
        base = {"subject": "ent-0001", "relation": "rel-0001", "object": "ent-0001", "seed": 1}
        saturday = client.get(
            "/children/cw/predictions", params={**base, "date": "2024-06-01"}
        )
        wednesday = client.get(
            "/children/cw/predictions", params={**base, "date": "2024-05-29"}
        )
        assert saturday.status_code == wednesday.status_code == 200
        assert saturday.json()["plausibility"] > wednesday.json()["plausibility"]
        assert "not calibrated" in saturday.json()["note"]

    def test_prediction_unknown_symbol_404(self, client):
        seed_weekly_child(client)
        response = client.get(
            "/children/cw/predictions",
            params={"subject": "ghost", "relation": "rel-0001", "object": "ent-0001",
                    "date": "2024-06-01"},
        )
        assert response.status_code == 404
        assert "ghost" in response.json()["message"]

    def test_anonymized_export_contract(self, client):
        seed_weekly_child(client)
        response = client.get("/children/cw/export/anonymized", params={"seed": 2, "max_steps": 5})
        assert response.status_code == 200
        export = response.json()["export"]
        assert export["anonymized"] is True
        raw = json.dumps(export)
        assert "pseudonym_map" not in raw
        for label in ("Riley", "math homework", "Rex"):
            assert label not in raw


class TestCorpusEndpoints:
    def test_pending_review_flow(self, client):
        pending = client.get("/corpus/pending").json()["pending"]
        assert {p["id"] for p in pending} == {"pp-001", "pp-002", "pp-003"}
        approved = client.post(
            "/corpus/review", json={"statement_id": "pp-001", "verdict": "approved"}
        )
        assert approved.status_code == 200
        again = client.post(
            "/corpus/review", json={"statement_id": "pp-001", "verdict": "approved"}
        )
        assert again.status_code == 409
        left = {p["id"] for p in client.get("/corpus/pending").json()["pending"]}
        assert left == {"pp-002", "pp-003"}

    def test_rejected_paraphrase_never_matchable(self, client):
        client.post("/corpus/review", json={"statement_id": "pp-001", "verdict": "rejected"})
        for seed in range(120):
            body = client.post(
                "/match",
                json={"subject": "child", "relation": "refuses to go to", "object": "school",
                      "seed": seed},
            ).json()
            assert body["match"]["matched"] is True
            assert body["statement"]["id"] != "pp-001"

    def test_augment_adds_pending(self, client):
        response = client.post(
            "/corpus/augment",
            json={"paraphrases": [{"id": "pp-900", "source_id": "st-001", "text": "another way in"}]},
        )
        assert response.status_code == 200
        assert "pp-900" in {p["id"] for p in client.get("/corpus/pending").json()["pending"]}

    def test_validate_and_classify_compute(self, client):
        drafts = [{"id": "d1", "scenario_id": "scn-01", "text": "hello"}]
        ratings = [
            {"statement_id": "d1", "rater_id": f"r{i}", "rating": r}
            for i, r in enumerate([5, 5, 4, 5, 5])
        ]
        categories = [
            {"statement_id": "d1", "rater_id": f"r{i}", "category": "EMP"} for i in range(5)
        ]
        validated = client.post("/corpus/validate", json={"drafts": drafts, "ratings": ratings})
        assert validated.status_code == 200
        assert validated.json()["kept"][0]["mean"] == pytest.approx(4.8)
        classified = client.post(
            "/corpus/classify",
            json={"drafts": drafts, "ratings": ratings, "categories": categories},
        )
        assert classified.status_code == 200
        assert classified.json()["validated"][0]["category"] == "EMP"
        assert classified.json()["report"]["kappa"] == 1.0


class TestPersistenceAcrossRestart:
    def test_state_survives_restart(self, tmp_path):
        config = make_config(tmp_path)
        with TestClient(create_app(config)) as client:
            client.post("/children", json=intake_body())
            client.post("/children/c1/turns", json=turn_body(seed=2))
            client.post("/corpus/review", json={"statement_id": "pp-001", "verdict": "rejected"})
            before = client.get("/children/c1").json()
        with TestClient(create_app(config)) as reborn:
            after = reborn.get("/children/c1").json()
            assert after == before
            pending = {p["id"] for p in reborn.get("/corpus/pending").json()["pending"]}
            assert "pp-001" not in pending


def test_match_endpoint_unmatched_has_no_statement(client):
    body = client.post(
        "/match", json={"subject": "robot", "relation": "beeps at", "object": "moon"}
    ).json()
    assert body["match"]["matched"] is False
    assert body["statement"] is None and body["justification"] is None
