"""atlasd endpoint tests over the in-process test client.

The Maya fixture's learner-authored cards (captures and the response,
never the provocations) are replayed through the live ingest loop so the
service issues its own provocations. Expected card counts and link
values below were confirmed by hand against the policy rules before
being frozen here.
"""

import json

import pytest
from fastapi.testclient import TestClient

from fieldatlas.fixture import maya_fixture
from fieldatlas.model import verify_chain
from fieldatlas.service import AtlasService, ServiceConfig, create_app
from fieldatlas.store import SessionStore

MAYA = maya_fixture()


def make_client(tmp_path, **overrides) -> TestClient:
    config = ServiceConfig(data_dir=str(tmp_path / "data"), **overrides)
    return TestClient(create_app(config))


def create_session(client, session, **extra):
    body = {
        "learner_id": session.learner_id,
        "title": session.title,
        "session_id": session.id,
        "embed_dim": session.embed_dim,
        **extra,
    }
    if session.geofence is not None:
        body["geofence"] = {
            "lat": session.geofence.center.lat,
            "lon": session.geofence.center.lon,
            "radius_m": session.geofence.radius_m,
        }
    resp = client.post("/sessions", json=body)
    assert resp.status_code == 201, resp.text
    return resp.json()


def card_body(card, **extra):
    return {
        "ts": card.ts,
        "lat": card.geo.lat,
        "lon": card.geo.lon,
        "photo_ref": card.photo_ref,
        "voice_text": card.voice_text,
        "kind": card.kind,
        **extra,
    }


def replay(client, session):
    """Post the session's learner-authored cards; return ingest records."""
    records = []
    for card in session.cards:
        if card.kind == "provocation":
            continue
        resp = client.post(f"/sessions/{session.id}/cards", json=card_body(card))
        assert resp.status_code == 201, resp.text
        records.append(resp.json())
    return records


class TestSessionEndpoints:
    def test_create_returns_header(self, tmp_path):
        client = make_client(tmp_path)
        header = create_session(client, MAYA.met)
        assert header["id"] == "maya-met"
        assert header["learner_id"] == "maya"
        assert header["geofence"]["radius_m"] == MAYA.met.geofence.radius_m
        assert header["embed_dim"] == 128

    def test_duplicate_is_409(self, tmp_path):
        client = make_client(tmp_path)
        create_session(client, MAYA.met)
        resp = client.post("/sessions", json={
            "learner_id": "maya", "title": "again", "session_id": "maya-met",
        })
        assert resp.status_code == 409
        assert resp.json()["code"] == "session-exists"

    def test_missing_title_is_400(self, tmp_path):
        client = make_client(tmp_path)
        resp = client.post("/sessions", json={"learner_id": "maya"})
        assert resp.status_code == 400
        assert resp.json()["code"] == "bad-request"

    def test_bad_geofence_is_400(self, tmp_path):
        client = make_client(tmp_path)
        resp = client.post("/sessions", json={
            "learner_id": "maya", "title": "t",
            "geofence": {"lat": 95.0, "lon": 0.0, "radius_m": 10.0},
        })
        assert resp.status_code == 400
        assert resp.json()["code"] == "bad-request"

    def test_non_object_body_is_400(self, tmp_path):
        client = make_client(tmp_path)
        resp = client.post("/sessions", json=[1, 2, 3])
        assert resp.status_code == 400
        assert resp.json()["code"] == "bad-request"


class TestCardValidation:
    @pytest.fixture
    def client(self, tmp_path):
        client = make_client(tmp_path)
        create_session(client, MAYA.met)
        return client

    def good(self):
        return card_body(MAYA.met.cards[0])

    def test_unknown_session_is_404(self, client):
        resp = client.post("/sessions/ghost/cards", json=self.good())
        assert resp.status_code == 404
        assert resp.json()["code"] == "session-not-found"

    @pytest.mark.parametrize("field", ["ts", "lat", "lon", "photo_ref", "voice_text"])
    def test_missing_field(self, client, field):
        body = self.good()
        del body[field]
        resp = client.post("/sessions/maya-met/cards", json=body)
        assert resp.status_code == 400
        assert resp.json()["code"] == "bad-card"

    @pytest.mark.parametrize("patch", [
        {"ts": "not-a-timestamp"},
        {"ts": "2025-10-18 14:00:00"},
        {"lat": "40.7"},
        {"lat": True},
        {"lon": 200.0},
        {"kind": "provocation"},
        {"kind": "selfie"},
        {"idempotency_key": 7},
    ])
    def test_bad_value(self, client, patch):
        resp = client.post("/sessions/maya-met/cards", json={**self.good(), **patch})
        assert resp.status_code == 400
        assert resp.json()["code"] == "bad-card"


class TestIngest:
    def test_fresh_card_is_201(self, tmp_path):
        client = make_client(tmp_path)
        create_session(client, MAYA.met)
        resp = client.post("/sessions/maya-met/cards",
                           json=card_body(MAYA.met.cards[0]))
        assert resp.status_code == 201
        record = resp.json()
        assert record["card"]["id"] == "maya-met:000"
        assert record["card"]["prev_hash"] == "0" * 64
        assert record["card"]["kind"] == "capture"

    def test_idempotent_replay_is_200(self, tmp_path):
        client = make_client(tmp_path)
        create_session(client, MAYA.met)
        body = card_body(MAYA.met.cards[0], idempotency_key="once")
        first = client.post("/sessions/maya-met/cards", json=body)
        second = client.post("/sessions/maya-met/cards", json=body)
        assert first.status_code == 201
        assert second.status_code == 200
        assert second.json()["card"]["id"] == first.json()["card"]["id"]
        assert second.json()["provocation"] is None
        cards = client.get("/sessions/maya-met/cards").json()["cards"]
        assert len(cards) == 1

    def test_card_durable_before_response(self, tmp_path):
        client = make_client(tmp_path)
        create_session(client, MAYA.met)
        resp = client.post("/sessions/maya-met/cards",
                           json=card_body(MAYA.met.cards[0]))
        assert resp.status_code == 201
        # a cold process must see the card with an intact chain
        store = SessionStore(tmp_path / "data")
        session = store.get("maya-met")
        assert [c.id for c in session.cards] == ["maya-met:000"]
        assert verify_chain(session) is None

    def test_restart_preserves_idempotency(self, tmp_path):
        client = make_client(tmp_path)
        create_session(client, MAYA.met)
        body = card_body(MAYA.met.cards[0], idempotency_key="boot")
        first = client.post("/sessions/maya-met/cards", json=body)
        reborn = make_client(tmp_path)
        second = reborn.post("/sessions/maya-met/cards", json=body)
        assert second.status_code == 200
        assert second.json()["card"]["id"] == first.json()["card"]["id"]

    def test_cards_after_cursor(self, tmp_path):
        client = make_client(tmp_path, policy="off")
        create_session(client, MAYA.met)
        replay(client, MAYA.met)
        all_cards = client.get("/sessions/maya-met/cards").json()["cards"]
        assert [c["seq"] for c in all_cards] == list(range(6))
        tail = client.get("/sessions/maya-met/cards?after=3").json()["cards"]
        assert [c["seq"] for c in tail] == [4, 5]


class TestPolicies:
    def kinds(self, client, session_id):
        cards = client.get(f"/sessions/{session_id}/cards").json()["cards"]
        return [c["kind"] for c in cards]

    def test_off_never_provokes(self, tmp_path):
        client = make_client(tmp_path, policy="off")
        create_session(client, MAYA.met)
        records = replay(client, MAYA.met)
        assert all(r["provocation"] is None for r in records)
        assert self.kinds(client, "maya-met") == [
            "capture", "capture", "response", "capture", "capture", "capture",
        ]

    def test_every_nth(self, tmp_path):
        client = make_client(tmp_path, policy="every-nth", policy_nth=2)
        create_session(client, MAYA.met)
        replay(client, MAYA.met)
        # second and fourth captures are each the 2nd since a provocation;
        # the response does not advance the counter
        assert self.kinds(client, "maya-met") == [
            "capture", "capture", "provocation", "response",
            "capture", "capture", "provocation", "capture",
        ]

    def test_on_link_only(self, tmp_path):
        client = make_client(tmp_path, policy="on-link")
        create_session(client, MAYA.met)
        records = replay(client, MAYA.met)
        # only the last capture links back (to the third capture, with the
        # nearest preceding capture excluded), so only it provokes
        provs = [r["provocation"] for r in records if r["provocation"]]
        assert len(provs) == 1
        assert provs[0]["link"]["from"] == "maya-met:005"
        assert provs[0]["link"]["to"] == "maya-met:003"
        assert provs[0]["link"]["similarity"] == pytest.approx(0.50903, abs=1e-5)
        assert provs[0]["link"]["cross_session"] is False

    def test_auto_links_else_nth(self, tmp_path):
        client = make_client(tmp_path)
        create_session(client, MAYA.met)
        records = replay(client, MAYA.met)
        provs = [r["provocation"] for r in records if r["provocation"]]
        assert len(provs) == 3
        assert [p["link"] is None for p in provs] == [True, True, False]
        assert provs[2]["link"]["to"] == "maya-met:004"
        assert self.kinds(client, "maya-met") == [
            "capture", "capture", "provocation", "response", "capture",
            "capture", "provocation", "capture", "provocation",
        ]

    def test_provocation_ts_follows_trigger(self, tmp_path):
        client = make_client(tmp_path)
        create_session(client, MAYA.met)
        records = replay(client, MAYA.met)
        prov = next(r["provocation"] for r in records if r["provocation"])
        assert prov["card"]["ts"] == "2025-10-18T14:04:01Z"
        assert prov["card"]["lat"] == records[1]["card"]["lat"]

    def test_cross_session_link_provokes(self, tmp_path):
        client = make_client(tmp_path)
        create_session(client, MAYA.met)
        replay(client, MAYA.met)
        create_session(client, MAYA.lincoln)
        records = replay(client, MAYA.lincoln)
        prov = records[0]["provocation"]
        assert prov is not None
        assert prov["card"]["voice_text"] == (
            "You previously observed 'washington' and 'only'. "
            "How does 'lincoln' and 'only' achieve a similar effect?"
        )
        link = prov["link"]
        assert link["from"] == "maya-lincoln:000"
        assert link["to"] == "maya-met:000"
        assert link["similarity"] == pytest.approx(0.4914731871, abs=1e-9)
        assert link["cross_session"] is True
        assert link["surfaced"] is True

    def test_surfaced_pair_not_reused(self, tmp_path):
        svc = AtlasService(ServiceConfig(data_dir=str(tmp_path / "data")))
        met = MAYA.met
        svc.store.create(met.learner_id, met.title, geofence=met.geofence,
                         embed_dim=met.embed_dim, session_id=met.id)
        for card in met.cards[:6]:
            if card.kind == "provocation":
                continue
            svc.ingest(met.id, card_body(card))
        # auto policy issued two provocations above, so the final capture
        # lands as 007 and would link to 004; with that pair already
        # surfaced the link is skipped, and one capture since the last
        # provocation leaves the every-nth branch not yet due
        svc.store.mark_surfaced("maya", "maya-met:007", "maya-met:004")
        record, _ = svc.ingest(met.id, card_body(met.cards[6]))
        assert record["provocation"] is None

    def test_gate_failure_yields_no_provocation(self, tmp_path):
        client = make_client(tmp_path, policy="every-nth", policy_nth=1)
        create_session(client, MAYA.met)
        body = card_body(MAYA.met.cards[0])
        body["voice_text"] = "it is that and the of to"
        resp = client.post("/sessions/maya-met/cards", json=body)
        assert resp.status_code == 201
        assert resp.json()["provocation"] is None
        assert self.kinds(client, "maya-met") == ["capture"]


class TestTrajectoryEndpoint:
    def test_empty_session_is_404(self, tmp_path):
        client = make_client(tmp_path)
        create_session(client, MAYA.met)
        resp = client.get("/sessions/maya-met/trajectory")
        assert resp.status_code == 404
        assert resp.json()["code"] == "empty-trajectory"

    def test_replayed_session_trajectory(self, tmp_path):
        client = make_client(tmp_path)
        create_session(client, MAYA.met)
        replay(client, MAYA.met)
        rec = client.get("/sessions/maya-met/trajectory").json()
        assert rec["session_id"] == "maya-met"
        assert len(rec["points"]) == 6
        assert set(rec["points"][0]) == {"card_id", "ts", "xy", "v", "lat", "lon"}
        assert rec["provocation_indices"] == [2, 6, 8]
        assert len(rec["pivots"]) == 1
        assert rec["pivots"][0]["index"] == 1
        assert rec["pivots"][0]["attributed_provocation"] == "maya-met:002"


class TestAuthenticityEndpoint:
    def test_replayed_session_is_authentic(self, tmp_path):
        client = make_client(tmp_path)
        create_session(client, MAYA.met)
        replay(client, MAYA.met)
        report = client.get("/sessions/maya-met/authenticity").json()
        assert report["session_id"] == "maya-met"
        assert report["authentic"] is True
        assert report["violations"] == []
        assert report["params_used"]["v_max"] == 3.0


class TestLinksEndpoint:
    def test_learner_network_with_surfaced_flags(self, tmp_path):
        client = make_client(tmp_path)
        create_session(client, MAYA.met)
        replay(client, MAYA.met)
        create_session(client, MAYA.lincoln)
        replay(client, MAYA.lincoln)
        out = client.get("/learners/maya/links").json()
        assert out["learner_id"] == "maya"
        pairs = {(ln["from"], ln["to"]): ln for ln in out["links"]}
        assert set(pairs) == {
            ("maya-met:007", "maya-met:004"),
            ("maya-lincoln:000", "maya-met:000"),
        }
        assert all(ln["surfaced"] for ln in out["links"])

    def test_unknown_learner_is_empty(self, tmp_path):
        client = make_client(tmp_path)
        out = client.get("/learners/ghost/links").json()
        assert out["links"] == []


class TestEvents:
    def test_json_event_log(self, tmp_path):
        client = make_client(tmp_path)
        create_session(client, MAYA.met)
        replay(client, MAYA.met)
        events = client.get("/sessions/maya-met/events?format=json").json()["events"]
        assert [e["seq"] for e in events] == list(range(len(events)))
        by_type = {}
        for e in events:
            by_type.setdefault(e["type"], []).append(e)
        assert len(by_type["card-appended"]) == 6
        assert len(by_type["provocation-issued"]) == 3
        assert len(by_type["pivot-detected"]) >= 1
        pivot = by_type["pivot-detected"][0]["data"]
        assert pivot["attributed_provocation"] == "maya-met:002"

    def test_after_cursor_filters(self, tmp_path):
        client = make_client(tmp_path)
        create_session(client, MAYA.met)
        replay(client, MAYA.met)
        events = client.get("/sessions/maya-met/events?format=json").json()["events"]
        last = events[-1]["seq"]
        tail = client.get(
            f"/sessions/maya-met/events?format=json&after={last - 2}"
        ).json()["events"]
        assert [e["seq"] for e in tail] == [last - 1, last]

    def test_stream_framing(self, tmp_path):
        client = make_client(tmp_path)
        create_session(client, MAYA.met)
        replay(client, MAYA.met)
        resp = client.get(
            "/sessions/maya-met/events?max_events=2&idle_timeout_s=0.05"
        )
        assert resp.headers["content-type"].startswith("text/event-stream")
        frames = [f for f in resp.text.split("\n\n") if f]
        assert len(frames) == 2
        lines = frames[0].split("\n")
        assert lines[0] == "id: 0"
        assert lines[1] == "event: card-appended"
        data = json.loads(lines[2].removeprefix("data: "))
        assert data["id"] == "maya-met:000"

    def test_stream_resumes_after_cursor(self, tmp_path):
        client = make_client(tmp_path)
        create_session(client, MAYA.met)
        replay(client, MAYA.met)
        resp = client.get(
            "/sessions/maya-met/events?after=7&max_events=10&idle_timeout_s=0.05"
        )
        ids = [ln for ln in resp.text.split("\n") if ln.startswith("id: ")]
        assert ids[0] == "id: 8"

    def test_unknown_session_is_404(self, tmp_path):
        client = make_client(tmp_path)
        resp = client.get("/sessions/ghost/events?format=json")
        assert resp.status_code == 404

    def test_bad_format_is_400(self, tmp_path):
        client = make_client(tmp_path)
        create_session(client, MAYA.met)
        resp = client.get("/sessions/maya-met/events?format=xml")
        assert resp.status_code == 400
        assert resp.json()["code"] == "bad-request"


class TestReadOnlyEndpoints:
    def test_reads_do_not_mutate(self, tmp_path):
        client = make_client(tmp_path)
        create_session(client, MAYA.met)
        replay(client, MAYA.met)

        def snapshot():
            cards = client.get("/sessions/maya-met/cards").json()["cards"]
            events = client.get(
                "/sessions/maya-met/events?format=json"
            ).json()["events"]
            return [c["self_hash"] for c in cards], len(events)

        before = snapshot()
        client.get("/sessions/maya-met/trajectory")
        client.get("/sessions/maya-met/authenticity")
        client.get("/learners/maya/links")
        assert snapshot() == before


class TestConfig:
    def test_healthz_reports_config(self, tmp_path):
        client = make_client(tmp_path, policy="on-link")
        out = client.get("/healthz").json()
        assert out["ok"] is True
        assert out["config"]["policy"] == "on-link"

    def test_bad_policy_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            make_client(tmp_path, policy="sometimes")

    def test_config_file_round_trip(self, tmp_path):
        path = tmp_path / "atlas.json"
        path.write_text(json.dumps({"policy": "every-nth", "policy_nth": 3}))
        config = ServiceConfig.from_file(path)
        assert config.policy == "every-nth"
        assert config.policy_nth == 3

    def test_config_file_unknown_key(self, tmp_path):
        path = tmp_path / "atlas.json"
        path.write_text(json.dumps({"polciy": "off"}))
        with pytest.raises(ValueError):
            ServiceConfig.from_file(path)
