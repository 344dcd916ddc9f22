"""HTTP facade: sessions, queries, mutation, errors, snapshots, wire format."""
from __future__ import annotations

import json

import pytest
from conftest import fixture_document, fixture_text
from fastapi.testclient import TestClient

from concernkit.service import canonical_json, create_app

A2 = ["switM cam advanced_mode", "switM sam advanced_mode"]
A3 = ["switM sam advanced_mode", "switM cam advanced_mode"]
NAMED_PLANS = [
    ["tOn basic_mode"],
    A2,
    A3,
    ["switM sam advanced_mode", "tOn basic_mode"],
    ["switM cam advanced_mode", "tOn basic_mode"],
]


@pytest.fixture()
def client():
    with TestClient(create_app(cors=False)) as c:
        yield c


def make_session(client, name: str = "lkas_mini_attacked") -> str:
    r = client.post("/sessions", json={"document": fixture_document(name)})
    assert r.status_code == 201, r.text
    return r.json()["id"]


# ---------------------------------------------------------------------------
# Session lifecycle

def test_create_session(client):
    r = client.post("/sessions", json={"document": fixture_document("lkas_mini")})
    assert r.status_code == 201
    body = r.json()
    assert set(body) == {"engine_version", "evaluation_mode", "id", "state"}
    assert body["evaluation_mode"] == "plain"
    assert "secure_boot" in body["state"]["true"]
    assert "active cam advanced_mode" in body["state"]["false"]
    assert len(body["state"]["true"]) + len(body["state"]["false"]) == 15


def test_sessions_are_listed_in_creation_order(client):
    first = make_session(client, "lkas_mini")
    second = make_session(client, "trivial")
    r = client.get("/sessions")
    assert r.status_code == 200
    assert r.json()["sessions"] == [first, second]


def test_state_and_theory_roundtrip(client):
    sid = make_session(client, "lkas_mini")
    state = client.get(f"/sessions/{sid}/state")
    assert state.status_code == 200
    assert state.json()["history"] == []
    assert state.json()["id"] == sid
    theory = client.get(f"/sessions/{sid}/theory")
    assert theory.status_code == 200
    assert theory.json()["document"] == fixture_document("lkas_mini")


def test_unknown_session_is_a_404(client):
    for r in (
        client.get("/sessions/nope/state"),
        client.get("/sessions/nope/theory"),
        client.post("/sessions/nope/query/satisfaction", json={}),
        client.post("/sessions/nope/apply", json={"plan": []}),
    ):
        assert r.status_code == 404
        assert r.json()["error"]["code"] == "UNKNOWN_SESSION"


def test_unroutable_requests_use_the_error_envelope(client):
    missing = client.get("/no/such/route")
    assert missing.status_code == 404
    assert missing.json()["error"]["code"] == "NOT_FOUND"
    assert "engine_version" in missing.json()
    wrong_verb = client.delete("/sessions")
    assert wrong_verb.status_code == 405
    assert wrong_verb.json()["error"]["code"] == "METHOD_NOT_ALLOWED"


def test_invalid_documents_carry_diagnostics(client):
    doc = fixture_document("lkas_mini")
    doc["ontology"]["concerns"].append({"id": "integrity"})
    r = client.post("/sessions", json={"document": doc})
    assert r.status_code == 422
    err = r.json()["error"]
    assert err["code"] == "DUPLICATE_CONCERN"
    assert any(d["code"] == "DUPLICATE_CONCERN" for d in err["diagnostics"])
    assert all({"code", "args", "message"} <= set(d) for d in err["diagnostics"])


def test_malformed_request_bodies_are_schema_errors(client):
    r = client.post("/sessions", json={"theory": {}})
    assert r.status_code == 400
    assert r.json()["error"]["code"] == "SCHEMA"
    assert r.json()["error"]["diagnostics"]


# ---------------------------------------------------------------------------
# Satisfaction and what-if

def test_satisfaction_defaults_to_plain(client):
    sid = make_session(client, "lkas_mini")
    r = client.post(f"/sessions/{sid}/query/satisfaction", json={})
    assert r.status_code == 200
    body = r.json()
    assert body["evaluation_mode"] == "plain"
    assert all(row["satisfied"] for row in body["concerns"].values())
    assert set(body["concerns"]) == {"cybersecurity", "integrity", "security", "trustworthiness"}


def test_attacked_state_fails_grounded_satisfaction(client):
    sid = make_session(client)
    r = client.post(f"/sessions/{sid}/query/satisfaction", json={"mode": "grounded"})
    concerns = r.json()["concerns"]
    assert not concerns["integrity"]["satisfied"]
    assert not concerns["trustworthiness"]["satisfied"]
    assert concerns["trustworthiness"]["failing_subconcerns"] == ["security"]


def test_whatif_previews_without_committing(client):
    sid = make_session(client, "lkas_mini")
    r = client.post(f"/sessions/{sid}/whatif",
                    json={"set": ["-basic_mode"], "mode": "grounded"})
    assert r.status_code == 200
    body = r.json()
    assert "basic_mode" in body["state"]["false"]
    assert not body["concerns"]["integrity"]["satisfied"]
    # plain mode still sees the advanced_mode property itself
    plain = client.post(f"/sessions/{sid}/whatif", json={"set": ["-basic_mode"]})
    assert plain.json()["concerns"]["integrity"]["satisfied"]
    after = client.get(f"/sessions/{sid}/state").json()
    assert "basic_mode" in after["state"]["true"]
    assert after["history"] == []


def test_override_validation(client):
    sid = make_session(client, "lkas_mini")
    unknown = client.post(f"/sessions/{sid}/query/satisfaction", json={"set": ["flux"]})
    assert unknown.status_code == 400
    assert unknown.json()["error"]["code"] == "UNKNOWN_ATOM"
    conflict = client.post(f"/sessions/{sid}/query/satisfaction",
                           json={"set": ["basic_mode", "-basic_mode"]})
    assert conflict.status_code == 400
    assert conflict.json()["error"]["code"] == "SET_CONFLICT"
    broken = client.post(f"/sessions/{sid}/query/satisfaction",
                         json={"set": ["active cam advanced_mode"]})
    assert broken.status_code == 409
    assert broken.json()["error"]["code"] == "INVALID_STATE"
    garbled = client.post(f"/sessions/{sid}/query/satisfaction",
                          json={"set": ["active cam"]})
    assert garbled.status_code == 400
    assert garbled.json()["error"]["code"] == "BAD_LITERAL"


def test_empty_whatif_is_rejected(client):
    sid = make_session(client, "lkas_mini")
    r = client.post(f"/sessions/{sid}/whatif", json={"set": []})
    assert r.status_code == 400
    assert r.json()["error"]["code"] == "SCHEMA"


# ---------------------------------------------------------------------------
# Trust and satisfaction-likelihood queries

def test_trust_table(client):
    sid = make_session(client, "lkas_mini")
    r = client.post(f"/sessions/{sid}/query/trust", json={})
    body = r.json()
    rows = {row["component"]: row for row in body["scores"]}
    assert rows["bat"]["tw"] == {"num": 4, "den": 1, "decimal": "4"}
    assert rows["cam"]["tw"] == {"num": 4, "den": 5, "decimal": "0.8"}
    assert (rows["cam"]["pos_pairs"], rows["cam"]["npos_pairs"]) == (4, 4)
    assert body["ranking"] == [["bat"], ["cam", "sam"]]
    assert body["most"] == ["bat"] and body["least"] == ["cam", "sam"]


def test_los_table_and_weighting(client):
    sid = make_session(client, "lkas_mini")
    r = client.post(f"/sessions/{sid}/query/los",
                    json={"priority": ["trustworthiness"]})
    body = r.json()
    assert body["table"]["integrity"]["deg_pos"] == {"num": 3, "den": 5, "decimal": "0.6"}
    assert body["table"]["trustworthiness"]["los"]["num"] == 3
    assert body["weighted"] == {"num": 3, "den": 5, "decimal": "0.6"}
    assert body["weights"]["trustworthiness"]["num"] == 1
    assert body["lex_vector"] == [{"num": 3, "den": 5, "decimal": "0.6"}]
    assert body["priority"] == ["trustworthiness"]


def test_los_weight_parsing(client):
    sid = make_session(client, "lkas_mini")
    stringy = client.post(f"/sessions/{sid}/query/los",
                          json={"weights": {"trustworthiness": "2/3"}})
    assert stringy.json()["weighted"] == {"num": 2, "den": 5, "decimal": "0.4"}
    garbage = client.post(f"/sessions/{sid}/query/los",
                          json={"weights": {"trustworthiness": "lots"}})
    assert garbage.status_code == 400
    assert garbage.json()["error"]["code"] == "BAD_NUMBER"
    floaty = client.post(f"/sessions/{sid}/query/los",
                         json={"weights": {"trustworthiness": 0.5}})
    assert floaty.status_code == 400
    assert floaty.json()["error"]["code"] == "SCHEMA"


# ---------------------------------------------------------------------------
# Mitigation search

def test_mitigation_search_over_the_attacked_session(client):
    sid = make_session(client)
    r = client.post(f"/sessions/{sid}/query/mitigate",
                    json={"concerns": ["integrity"], "horizon": 2})
    body = r.json()
    assert body["evaluation_mode"] == "grounded"
    assert body["count"] == 21 and len(body["plans"]) == 21
    assert body["plans"][0]["actions"] == ["switM cam advanced_mode"]
    assert body["plans"][2]["actions"] == ["tOn basic_mode"]
    assert len(body["plans"][2]["final_states"]) == 2
    assert "scoreboard" not in body and "best" not in body

    minimal = client.post(f"/sessions/{sid}/query/mitigate",
                          json={"concerns": ["integrity"], "horizon": 2, "minimal": True})
    assert minimal.json()["count"] == 9


def test_policy_scoring_during_search(client):
    sid = make_session(client)
    r = client.post(f"/sessions/{sid}/query/mitigate",
                    json={"concerns": ["integrity"], "horizon": 2,
                          "policy": "max_probability"})
    body = r.json()
    assert body["policy"] == "max_probability"
    assert len(body["scoreboard"]) == 21
    # over the full sweep the winners are the plans built around the most
    # reliable single action; a curated shortlist is scored separately below
    assert body["best"] == [
        ["switM sam advanced_mode"],
        ["switM sam advanced_mode", "tOff powerful_mode"],
        ["switM sam advanced_mode", "tOff saving_mode"],
        ["tOff powerful_mode", "switM sam advanced_mode"],
        ["tOff saving_mode", "switM sam advanced_mode"],
    ]
    by_actions = {tuple(row["actions"]): row["score"] for row in body["scoreboard"]}
    assert by_actions[("switM sam advanced_mode",)] == {"num": 7, "den": 10, "decimal": "0.7"}
    assert by_actions[tuple(A2)] == {"num": 21, "den": 50, "decimal": "0.42"}


def test_scoring_an_explicit_shortlist(client):
    sid = make_session(client)
    r = client.post(f"/sessions/{sid}/query/mitigate",
                    json={"concerns": ["integrity"], "plans": NAMED_PLANS,
                          "policy": "max_probability"})
    body = r.json()
    assert body["count"] == 5
    assert [row["actions"] for row in body["scoreboard"]] == NAMED_PLANS
    assert body["best"] == [A2, A3]
    assert body["horizon"] is None
    dead = client.post(f"/sessions/{sid}/query/mitigate",
                       json={"concerns": ["integrity"],
                             "plans": [["tOn basic_mode", "tOn basic_mode"]]})
    assert dead.status_code == 409
    assert dead.json()["error"]["code"] == "NOT_EXECUTABLE"


def test_mitigation_request_validation(client):
    sid = make_session(client)
    for payload in (
        {"concerns": ["integrity"]},               # neither horizon nor plans
        {"concerns": [], "horizon": 2},            # empty goal set
        {"concerns": ["integrity"], "horizon": -1},
    ):
        r = client.post(f"/sessions/{sid}/query/mitigate", json=payload)
        assert r.status_code == 400
        assert r.json()["error"]["code"] == "SCHEMA"
    unknown = client.post(f"/sessions/{sid}/query/mitigate",
                          json={"concerns": ["resilience"], "horizon": 1})
    assert unknown.status_code == 400
    assert unknown.json()["error"]["code"] == "UNKNOWN_CONCERN"


def test_search_failures_map_to_service_unavailable(client):
    doc = fixture_document("lkas_mini")
    doc["analysis"] = dict(doc.get("analysis", {}))
    sid = make_session(client, "lkas_mini")
    r = client.post(f"/sessions/{sid}/query/mitigate",
                    json={"concerns": ["integrity"], "horizon": 9})
    assert r.status_code == 503
    assert r.json()["error"]["code"] == "BUDGET_EXCEEDED"


# ---------------------------------------------------------------------------
# Noncompliance

def test_noncompliance_weak_window(client):
    sid = make_session(client, "lkas_mini")
    r = client.post(f"/sessions/{sid}/query/noncompliance",
                    json={"sa": ["tOff secure_boot"], "sc": ["integrity"], "n": 1})
    body = r.json()
    assert body["evaluation_mode"] == "grounded"
    assert body["mode"] == "weak" and body["n"] == 1
    assert body["verdict"] is True
    assert body["witness"]["plan"] == []
    assert body["witness"]["violated_concern"] == "integrity"
    assert body["witness"]["initial"]["true"] == []


def test_noncompliance_strong_conflict(client):
    sid = make_session(client, "conflict")
    r = client.post(f"/sessions/{sid}/query/noncompliance",
                    json={"sa": ["tOn broadcast", "tOff broadcast"],
                          "sc": ["openness", "secrecy"], "n": 2, "mode": "strong"})
    body = r.json()
    assert body["verdict"] is True and body["witness"] is None
    assert body["sa"] == ["tOn broadcast", "tOff broadcast"]


def test_noncompliance_validation(client):
    sid = make_session(client, "conflict")
    bad_mode = client.post(f"/sessions/{sid}/query/noncompliance",
                           json={"sa": [], "sc": ["openness"], "n": 0, "mode": "maybe"})
    assert bad_mode.status_code == 400
    assert bad_mode.json()["error"]["code"] == "INVALID_CHECK"
    bad_n = client.post(f"/sessions/{sid}/query/noncompliance",
                        json={"sa": [], "sc": ["openness"], "n": -2})
    assert bad_n.status_code == 400
    assert bad_n.json()["error"]["code"] == "SCHEMA"


# ---------------------------------------------------------------------------
# Apply

def test_apply_moves_the_session(client):
    sid = make_session(client)
    r = client.post(f"/sessions/{sid}/apply", json={"plan": A2})
    assert r.status_code == 200
    body = r.json()
    assert body["branch"] == 0 and body["branch_count"] == 1
    assert body["history_length"] == 1
    assert "active cam advanced_mode" in body["state"]["true"]
    state = client.get(f"/sessions/{sid}/state").json()
    assert state["history"] == [{"set": [], "actions": A2, "branch": 0}]
    sat = client.post(f"/sessions/{sid}/query/satisfaction", json={"mode": "grounded"})
    assert sat.json()["concerns"]["integrity"]["satisfied"]


def test_ambiguous_apply_requires_a_branch_choice(client):
    sid = make_session(client)
    r = client.post(f"/sessions/{sid}/apply", json={"plan": ["tOn basic_mode"]})
    assert r.status_code == 409
    err = r.json()["error"]
    assert err["code"] == "BRANCH_AMBIGUOUS"
    assert len(err["branches"]) == 2
    assert "active bat powerful_mode" in err["branches"][0]["true"]
    assert "active bat normal_mode" in err["branches"][1]["true"]
    # no commit happened
    assert client.get(f"/sessions/{sid}/state").json()["history"] == []

    picked = client.post(f"/sessions/{sid}/apply",
                         json={"plan": ["tOn basic_mode"], "branch": 1})
    assert picked.status_code == 200
    assert "active bat normal_mode" in picked.json()["state"]["true"]
    assert picked.json()["branch"] == 1


def test_apply_error_paths(client):
    sid = make_session(client)
    dead = client.post(f"/sessions/{sid}/apply",
                       json={"plan": ["tOn basic_mode", "tOn basic_mode"]})
    assert dead.status_code == 409
    assert dead.json()["error"]["code"] == "NOT_EXECUTABLE"
    out_of_range = client.post(f"/sessions/{sid}/apply",
                               json={"plan": A2, "branch": 3})
    assert out_of_range.status_code == 400
    assert out_of_range.json()["error"]["code"] == "BAD_BRANCH"
    unknown = client.post(f"/sessions/{sid}/apply", json={"plan": ["warp"]})
    assert unknown.status_code == 400
    assert unknown.json()["error"]["code"] == "UNKNOWN_ACTION"


def test_apply_with_overrides_starts_from_the_adjusted_state(client):
    """Overriding basic_mode off reproduces the attacked situation, so the
    toggle branches on the battery exactly as it does there."""
    sid = make_session(client, "lkas_mini")
    r = client.post(f"/sessions/{sid}/apply",
                    json={"plan": ["tOn basic_mode"], "set": ["-basic_mode"], "branch": 0})
    assert r.status_code == 200
    assert "basic_mode" in r.json()["state"]["true"]
    assert "active bat powerful_mode" in r.json()["state"]["true"]
    history = client.get(f"/sessions/{sid}/state").json()["history"]
    assert history == [{"set": ["-basic_mode"], "actions": ["tOn basic_mode"], "branch": 0}]


def test_empty_plan_apply_commits_overrides(client):
    sid = make_session(client, "lkas_mini")
    r = client.post(f"/sessions/{sid}/apply", json={"plan": [], "set": ["-basic_mode"]})
    assert r.status_code == 200
    assert "basic_mode" in r.json()["state"]["false"]
    assert r.json()["history_length"] == 1


# ---------------------------------------------------------------------------
# Wire format

def test_responses_are_canonical_json(client):
    sid = make_session(client, "lkas_mini")
    r = client.post(f"/sessions/{sid}/query/los", json={})
    text = r.content.decode("utf-8")
    assert text.endswith("\n")
    assert text == canonical_json(json.loads(text))


def test_identical_queries_are_byte_identical(client):
    sid = make_session(client, "lkas_mini")
    first = client.post(f"/sessions/{sid}/query/satisfaction", json={"mode": "grounded"})
    second = client.post(f"/sessions/{sid}/query/satisfaction", json={"mode": "grounded"})
    assert first.content == second.content


def test_query_bodies_are_session_independent(client):
    a = make_session(client, "lkas_mini")
    b = make_session(client, "lkas_mini")
    assert a != b
    for path, payload in (
        ("query/satisfaction", {"mode": "grounded"}),
        ("query/trust", {}),
        ("query/los", {}),
        ("query/mitigate", {"concerns": ["integrity"], "horizon": 1}),
    ):
        ra = client.post(f"/sessions/{a}/{path}", json=payload)
        rb = client.post(f"/sessions/{b}/{path}", json=payload)
        assert ra.content == rb.content, path


def test_every_response_carries_the_version(client):
    sid = make_session(client, "trivial")
    for r in (
        client.get("/sessions"),
        client.get(f"/sessions/{sid}/state"),
        client.post(f"/sessions/{sid}/query/satisfaction", json={}),
        client.get("/sessions/zzz/state"),
    ):
        assert r.json()["engine_version"]


# ---------------------------------------------------------------------------
# Preload, CORS, snapshots

def test_preloaded_documents_become_sessions():
    app = create_app(preload=[fixture_text("trivial")], cors=False)
    with TestClient(app) as c:
        assert len(c.get("/sessions").json()["sessions"]) == 1


def test_cors_toggle():
    headers = {"Origin": "http://localhost:5173",
               "Access-Control-Request-Method": "POST"}
    with TestClient(create_app(cors=True)) as c:
        r = c.options("/sessions", headers=headers)
        assert r.headers.get("access-control-allow-origin") == "*"
    with TestClient(create_app(cors=False)) as c:
        r = c.options("/sessions", headers=headers)
        assert "access-control-allow-origin" not in r.headers


def test_cors_env_default(monkeypatch):
    monkeypatch.setenv("CONCERNKIT_CORS", "0")
    with TestClient(create_app()) as c:
        r = c.options("/sessions", headers={"Origin": "http://x",
                                            "Access-Control-Request-Method": "POST"})
        assert "access-control-allow-origin" not in r.headers


def test_snapshot_roundtrip(tmp_path):
    snap = tmp_path / "sessions.json"
    app = create_app(snapshot_path=str(snap), cors=False)
    with TestClient(app) as c:
        sid = make_session(c)
        c.post(f"/sessions/{sid}/apply", json={"plan": ["tOn basic_mode"], "branch": 1})
        before = c.get(f"/sessions/{sid}/state").content
    assert snap.exists()

    revived = create_app(snapshot_path=str(snap), cors=False)
    with TestClient(revived) as c:
        assert c.get("/sessions").json()["sessions"] == [sid]
        after = c.get(f"/sessions/{sid}/state")
        assert after.content == before
        assert "active bat normal_mode" in after.json()["state"]["true"]


def test_unreadable_snapshots_are_ignored(tmp_path):
    snap = tmp_path / "junk.json"
    snap.write_text("not json at all", encoding="utf-8")
    with TestClient(create_app(snapshot_path=str(snap), cors=False)) as c:
        assert c.get("/sessions").json()["sessions"] == []


def test_broken_snapshot_sessions_are_dropped(tmp_path):
    snap = tmp_path / "mixed.json"
    good = {"id": "aaaa", "document": fixture_document("trivial"), "history": []}
    bad = {"id": "bbbb", "document": {"nope": 1}, "history": []}
    snap.write_text(json.dumps({"engine_version": "x", "sessions": [bad, good]}),
                    encoding="utf-8")
    with TestClient(create_app(snapshot_path=str(snap), cors=False)) as c:
        assert c.get("/sessions").json()["sessions"] == ["aaaa"]
