from __future__ import annotations

import json

import pytest
from fastapi.testclient import TestClient

from nliforge.agreement import agreement_report
from nliforge.corpus import Label
from nliforge.hub import AnnotationHub, VoteLog, create_app

from .conftest import make_example

LABELS = [Label.ENTAILMENT, Label.CONTRADICTION, Label.NEUTRAL]


def holdout(n: int = 5):
    return [
        make_example(id=f"h{i:02d}", label=LABELS[i % 3], premise=f"P {i}", hypothesis=f"H {i}")
        for i in range(n)
    ]


@pytest.fixture
def client(tmp_path):
    app = create_app(holdout(), log_path=tmp_path / "votes.jsonl")
    with TestClient(app) as c:
        yield c


def create_session(client, annotators=("a", "b", "c")) -> str:
    response = client.post("/sessions", json={"annotators": list(annotators)})
    assert response.status_code == 201
    return response.json()["session_id"]


class TestSessionLifecycle:
    def test_create_and_status(self, client):
        sid = create_session(client)
        status = client.get(f"/sessions/{sid}").json()
        assert status["total"] == 5
        assert status["per_annotator_done"] == {"a": 0, "b": 0, "c": 0}
        assert status["complete"] is False

    def test_unknown_session_404(self, client):
        assert client.get("/sessions/nope").status_code == 404
        assert client.get("/sessions/nope/next", params={"annotator": "a"}).status_code == 404

    def test_too_few_annotators_400(self, client):
        response = client.post("/sessions", json={"annotators": ["solo"]})
        assert response.status_code == 400

    def test_unknown_example_ids_404(self, client):
        response = client.post(
            "/sessions", json={"annotators": ["a", "b"], "example_ids": ["ghost"]}
        )
        assert response.status_code == 404


class TestBlinding:
    def test_next_payload_has_no_label_fields(self, client):
        sid = create_session(client)
        payload = client.get(f"/sessions/{sid}/next", params={"annotator": "a"}).json()
        example = payload["example"]
        assert example["id"] == "h00"
        assert set(example) == {"id", "premise", "hypothesis", "domain", "length"}
        assert "label" not in json.dumps(payload)

    def test_every_prevote_payload_blinded(self, client):
        sid = create_session(client)
        for i in range(5):
            payload = client.get(f"/sessions/{sid}/next", params={"annotator": "b"}).json()
            assert "label" not in json.dumps(payload)
            vote = {"example_id": payload["example"]["id"], "annotator": "b",
                    "label": "neutral"}
            assert client.post(f"/sessions/{sid}/votes", json=vote).status_code == 201


class TestVoting:
    def test_vote_then_duplicate_conflict(self, client):
        sid = create_session(client)
        vote = {"example_id": "h00", "annotator": "a", "label": "entailment"}
        assert client.post(f"/sessions/{sid}/votes", json=vote).status_code == 201
        second = client.post(f"/sessions/{sid}/votes", json=vote)
        assert second.status_code == 409

    def test_unknown_annotator_404(self, client):
        sid = create_session(client)
        vote = {"example_id": "h00", "annotator": "zz", "label": "entailment"}
        assert client.post(f"/sessions/{sid}/votes", json=vote).status_code == 404

    def test_bad_label_400(self, client):
        sid = create_session(client)
        vote = {"example_id": "h00", "annotator": "a", "label": "maybe"}
        assert client.post(f"/sessions/{sid}/votes", json=vote).status_code == 400

    def test_next_advances_after_vote(self, client):
        sid = create_session(client)
        first = client.get(f"/sessions/{sid}/next", params={"annotator": "a"}).json()
        client.post(f"/sessions/{sid}/votes", json={
            "example_id": first["example"]["id"], "annotator": "a", "label": "neutral"})
        second = client.get(f"/sessions/{sid}/next", params={"annotator": "a"}).json()
        assert second["example"]["id"] == "h01"
        assert second["done"] == 1


def complete_session(client, sid, annotators=("a", "b", "c")):
    for annotator in annotators:
        while True:
            payload = client.get(
                f"/sessions/{sid}/next", params={"annotator": annotator}
            ).json()
            if payload["example"] is None:
                break
            ex_id = payload["example"]["id"]
            label = LABELS[(int(ex_id[1:]) + ord(annotator)) % 3]
            client.post(f"/sessions/{sid}/votes", json={
                "example_id": ex_id, "annotator": annotator, "label": label.value})


class TestReport:
    def test_report_before_completion_409_lists_missing(self, client):
        sid = create_session(client)
        client.post(f"/sessions/{sid}/votes", json={
            "example_id": "h00", "annotator": "a", "label": "neutral"})
        response = client.get(f"/sessions/{sid}/report")
        assert response.status_code == 409
        missing = response.json()["detail"]["missing"]
        assert ["h00", "b"] in missing
        assert ["h00", "a"] not in missing
        assert len(missing) == 14

    def test_report_matches_library_computation(self, client):
        sid = create_session(client)
        complete_session(client, sid)
        response = client.get(f"/sessions/{sid}/report")
        assert response.status_code == 200
        hub: AnnotationHub = client.app.state.hub
        expected = agreement_report(hub.sessions[sid]).to_dict()
        assert response.json() == json.loads(json.dumps(expected))


class TestPersistence:
    def test_votes_survive_restart(self, tmp_path):
        log_path = tmp_path / "votes.jsonl"
        corpus = holdout()
        with TestClient(create_app(corpus, log_path=log_path)) as client:
            sid = create_session(client)
            complete_session(client, sid)
            report_before = client.get(f"/sessions/{sid}/report").json()

        with TestClient(create_app(corpus, log_path=log_path)) as client:
            report_after = client.get(f"/sessions/{sid}/report").json()
        assert report_after == report_before

    def test_crash_duplicate_log_line_replayed_once(self, tmp_path):
        log_path = tmp_path / "votes.jsonl"
        corpus = holdout(2)
        hub = AnnotationHub(corpus, VoteLog(log_path))
        session = hub.create_session(["a", "b"], session_id="s1")
        hub.vote("s1", "h00", "a", Label.ENTAILMENT)
        # simulate a crash after the log write but before the ack: the same
        # event appears twice in the log
        lines = log_path.read_text().splitlines()
        log_path.write_text("\n".join(lines + [lines[-1]]) + "\n")

        rebuilt = AnnotationHub(corpus, VoteLog(log_path))
        votes = rebuilt.sessions["s1"].votes
        assert votes == {("h00", "a"): Label.ENTAILMENT}

    def test_rejected_votes_never_logged(self, tmp_path):
        log_path = tmp_path / "votes.jsonl"
        hub = AnnotationHub(holdout(2), VoteLog(log_path))
        hub.create_session(["a", "b"], session_id="s1")
        hub.vote("s1", "h00", "a", Label.ENTAILMENT)
        with pytest.raises(Exception):
            hub.vote("s1", "h00", "a", Label.NEUTRAL)
        events = [json.loads(l) for l in log_path.read_text().splitlines()]
        votes = [e for e in events if e["event"] == "vote"]
        assert len(votes) == 1
