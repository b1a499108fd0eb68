import numpy as np
import pytest
from fastapi.testclient import TestClient

from treespeller.server import create_app, nearest_symbol

CORPUS = "hi there. hi you. say hi. hi. hi again. there you go. you said hi."
IDENTITY_COUNTS = (np.eye(10, dtype=int) * 5).tolist()


@pytest.fixture()
def client():
    return TestClient(create_app())


@pytest.fixture()
def ids(client):
    lm = client.post("/models", json={"corpus_text": CORPUS}).json()["lm_id"]
    chan = client.post("/channels", json={"counts": IDENTITY_COUNTS}).json()["channel_id"]
    return lm, chan


def symbol_for(payload, target):
    """Client-side ideal user: the symbol of the leaf containing `target`."""
    root = payload["root_prefix"]
    for leaf in payload["leafs"]:
        if leaf["kind"] == "goback":
            if not target.startswith(root):
                return leaf["symbol"]
        elif any(target.startswith(p) for p in leaf["covered"]):
            return leaf["symbol"]
    raise AssertionError(f"no leaf contains {target!r}")


def type_string(client, session, target, max_queries=60):
    payload = session["query"]
    sid = payload["session_id"]
    for _ in range(max_queries):
        if payload["decided_text"]:
            return payload
        resp = client.post(f"/sessions/{sid}/input", json={"symbol_index": symbol_for(payload, target)})
        assert resp.status_code == 200
        payload = resp.json()
    return payload


def test_nearest_symbol_examples():
    angles = np.array([0.0, np.pi / 2, np.pi, 3 * np.pi / 2])
    assert nearest_symbol(0.1, angles) == 0
    assert nearest_symbol(np.pi / 2 + 0.1, angles) == 1
    # wraparound: just below a full turn is closest to angle 0
    assert nearest_symbol(2 * np.pi - 0.01, angles) == 0
    # exact midpoint ties resolve to the lower index
    assert nearest_symbol(np.pi / 4, angles) == 0


def test_register_model_validation(client):
    assert client.post("/models", json={}).status_code == 422
    assert (
        client.post("/models", json={"corpus_text": "a.", "corpus_path": "x.txt"}).status_code == 422
    )
    assert client.post("/models", json={"corpus_text": "a.", "order": 0}).status_code == 422
    assert client.post("/models", json={"corpus_text": "123"}).status_code == 422
    resp = client.post("/models", json={"corpus_text": CORPUS, "order": 2})
    assert resp.status_code == 200
    assert resp.json()["order"] == 2


def test_register_model_from_path(tmp_path, monkeypatch):
    (tmp_path / "corpus.txt").write_text(CORPUS)
    monkeypatch.setenv("TREESPELLER_DATA_DIR", str(tmp_path))
    client = TestClient(create_app())
    assert client.post("/models", json={"corpus_path": "corpus.txt"}).status_code == 200
    assert client.post("/models", json={"corpus_path": "missing.txt"}).status_code == 404


def test_register_channel_validation(client):
    assert client.post("/channels", json={"counts": [[1, 2, 3], [4, 5, 6]]}).status_code == 422
    assert client.post("/channels", json={"counts": [[1, 0], [0, 0]]}).status_code == 422
    ok = client.post("/channels", json={"counts": [[1, 0], [0, 0]], "smooth": True})
    assert ok.status_code == 200
    assert ok.json()["n_symbols"] == 2


def test_create_session_validation(client, ids):
    lm, chan = ids
    assert client.post("/sessions", json={"lm_id": "nope", "channel_id": chan}).status_code == 404
    assert client.post("/sessions", json={"lm_id": lm, "channel_id": "nope"}).status_code == 404
    bad_mode = client.post("/sessions", json={"lm_id": lm, "channel_id": chan, "mode": "x"})
    assert bad_mode.status_code == 422
    bad_alpha = client.post("/sessions", json={"lm_id": lm, "channel_id": chan, "alpha": 2.0})
    assert bad_alpha.status_code == 422


def test_session_payload_schema(client, ids):
    lm, chan = ids
    resp = client.post("/sessions", json={"lm_id": lm, "channel_id": chan})
    assert resp.status_code == 200
    body = resp.json()
    assert body["session"]["state"] == "awaiting_input"
    payload = body["query"]
    assert set(payload) == {
        "session_id", "trial_index", "root_prefix", "decided_text",
        "leafs", "capacity_bits", "expected_information_bits",
    }
    assert payload["trial_index"] == 0
    assert 1 <= len(payload["leafs"]) <= 10
    for leaf in payload["leafs"]:
        assert set(leaf) == {
            "prefix", "kind", "mass", "covered", "symbol", "angle", "parent_leaf_prev",
        }
        assert 0 <= leaf["symbol"] < 10


def test_noiseless_typing_session(client, ids):
    lm, chan = ids
    session = client.post(
        "/sessions", json={"lm_id": lm, "channel_id": chan, "alpha": 0.9}
    ).json()
    payload = type_string(client, session, "hi.")
    assert payload["decided_text"] == "hi."
    sid = payload["session_id"]
    snapshot = client.get(f"/sessions/{sid}").json()
    assert snapshot["decided_text"] == "hi."
    assert snapshot["session"]["state"] == "decided"
    assert snapshot["history_length"] == len(snapshot["history"]) > 0


def test_decided_session_rejects_input(client, ids):
    lm, chan = ids
    session = client.post(
        "/sessions", json={"lm_id": lm, "channel_id": chan, "alpha": 0.9}
    ).json()
    payload = type_string(client, session, "hi.")
    sid = payload["session_id"]
    resp = client.post(f"/sessions/{sid}/input", json={"symbol_index": 0})
    assert resp.status_code == 409


def test_input_validation(client, ids):
    lm, chan = ids
    session = client.post("/sessions", json={"lm_id": lm, "channel_id": chan}).json()
    sid = session["query"]["session_id"]
    assert client.post(f"/sessions/{sid}/input", json={}).status_code == 422
    both = {"symbol_index": 0, "angle_radians": 0.0}
    assert client.post(f"/sessions/{sid}/input", json=both).status_code == 422
    assert client.post(f"/sessions/{sid}/input", json={"symbol_index": 99}).status_code == 422
    assert client.post("/sessions/nope/input", json={"symbol_index": 0}).status_code == 404


def test_angle_input_maps_to_symbol(client, ids):
    lm, chan = ids
    session = client.post("/sessions", json={"lm_id": lm, "channel_id": chan}).json()
    payload = session["query"]
    sid = payload["session_id"]
    target_symbol = symbol_for(payload, "hi.")
    angle = payload["leafs"][0]["angle"]  # all leafs report their symbol angle
    angle = next(l["angle"] for l in payload["leafs"] if l["symbol"] == target_symbol)
    resp = client.post(f"/sessions/{sid}/input", json={"angle_radians": angle + 0.05})
    assert resp.status_code == 200
    assert resp.json()["trial_index"] == 1


def test_idempotent_input_token(client, ids):
    lm, chan = ids
    session = client.post("/sessions", json={"lm_id": lm, "channel_id": chan}).json()
    payload = session["query"]
    sid = payload["session_id"]
    body = {"symbol_index": symbol_for(payload, "hi."), "request_token": "tok-1"}
    first = client.post(f"/sessions/{sid}/input", json=body).json()
    second = client.post(f"/sessions/{sid}/input", json=body).json()
    assert first == second
    snapshot = client.get(f"/sessions/{sid}").json()
    assert snapshot["history_length"] == 1


def test_sessions_are_isolated(client, ids):
    lm, chan = ids
    s1 = client.post("/sessions", json={"lm_id": lm, "channel_id": chan}).json()
    s2 = client.post("/sessions", json={"lm_id": lm, "channel_id": chan}).json()
    sid1 = s1["query"]["session_id"]
    sid2 = s2["query"]["session_id"]
    assert sid1 != sid2
    client.post(f"/sessions/{sid1}/input", json={"symbol_index": symbol_for(s1["query"], "hi.")})
    assert client.get(f"/sessions/{sid1}").json()["history_length"] == 1
    assert client.get(f"/sessions/{sid2}").json()["history_length"] == 0


def test_session_expiry():
    client = TestClient(create_app(session_ttl=0.0))
    lm = client.post("/models", json={"corpus_text": CORPUS}).json()["lm_id"]
    chan = client.post("/channels", json={"counts": IDENTITY_COUNTS}).json()["channel_id"]
    session = client.post("/sessions", json={"lm_id": lm, "channel_id": chan}).json()
    sid = session["query"]["session_id"]
    import time

    time.sleep(0.01)
    assert client.get(f"/sessions/{sid}").status_code == 409


def test_animation_origin_present_after_first_input(client, ids):
    lm, chan = ids
    session = client.post("/sessions", json={"lm_id": lm, "channel_id": chan}).json()
    payload = session["query"]
    sid = payload["session_id"]
    resp = client.post(
        f"/sessions/{sid}/input", json={"symbol_index": symbol_for(payload, "hi.")}
    ).json()
    if not resp["decided_text"]:
        origins = [l["parent_leaf_prev"] for l in resp["leafs"] if l["kind"] != "goback"]
        assert any(o is not None for o in origins)
