"""Chat relay: admission pipeline, warnings, revisions, degraded delivery,
event fan-out, persistence, and the HTTP+event-stream surface."""

import json
import queue

import httpx
import pytest
from fastapi.testclient import TestClient

from chatqe.errors import ValidationError
from chatqe.service.app import create_app
from chatqe.service.state import (
    AuthError,
    ChatService,
    ForbiddenError,
    NotFoundError,
    OrderingError,
    SessionStore,
    event_type,
)

from helpers import EchoBackend, ServerHandle, StubDetector

EN, JA = {"name": "Ann", "lang": "en"}, {"name": "Joji", "lang": "ja"}


def make_service(tmp_path, probs=0.0, detector=None, fail_texts=(), threshold=0.5):
    store = SessionStore(tmp_path / "sessions")
    translators = {
        "en-ja": EchoBackend("en-ja", "en", "ja", fail_texts=fail_texts),
        "ja-en": EchoBackend("ja-en", "ja", "en", quality_tag="mt_high",
                             fail_texts=fail_texts),
    }
    detector = detector or StubDetector(probs=probs)
    return ChatService(store, translators, detector, threshold=threshold), detector


def tokens(session):
    return {p.participant_id: p.token for p in session.participants}


# ------------------------------------------------------------------- sessions


def test_create_session_validation(tmp_path):
    store = SessionStore(tmp_path)
    with pytest.raises(ValidationError):
        store.create_session(EN, {"name": "Bea", "lang": "en"})
    with pytest.raises(ValidationError):
        store.create_session(EN, {"name": "Bea", "lang": "fr"})
    with pytest.raises(ValidationError):
        store.create_session(EN, {"name": "  ", "lang": "ja"})
    session = store.create_session(EN, JA)
    assert {p.lang for p in session.participants} == {"en", "ja"}
    assert len({p.token for p in session.participants}) == 2


def test_auth_failures(tmp_path):
    service, _ = make_service(tmp_path)
    session = service.create_session(EN, JA)
    with pytest.raises(NotFoundError):
        service.post_message("ghost", "tok", "hi")
    with pytest.raises(AuthError):
        service.post_message(session.session_id, "wrong-token", "hi")
    with pytest.raises(AuthError):
        service.post_message(session.session_id, None, "hi")


# ------------------------------------------------------------------ admission


def test_first_message_is_unchecked(tmp_path):
    service, detector = make_service(tmp_path, probs=0.99)
    session = service.create_session(EN, JA)
    tok = tokens(session)
    message = service.post_message(session.session_id, tok["p1"], "Hello!")
    assert message.seq == 0
    assert message.message_id == "m0"
    assert message.status == "unchecked"
    assert message.warning is False
    assert message.prob_erroneous is None
    assert message.translated_text == "<ja>Hello!"
    assert detector.calls == []  # no context yet, detector never consulted


def test_second_message_is_checked_and_can_warn(tmp_path):
    service, detector = make_service(tmp_path, probs=0.9)
    session = service.create_session(EN, JA)
    tok = tokens(session)
    service.post_message(session.session_id, tok["p1"], "Hello!")
    reply = service.post_message(session.session_id, tok["p2"], "やあ!")
    assert reply.seq == 1
    assert reply.status == "checked"
    assert reply.prob_erroneous == 0.9
    assert reply.warning is True
    quad = detector.calls[0]
    assert quad.ctx_src == "Hello!"
    assert quad.ctx_tgt == "<ja>Hello!"
    assert quad.resp_src == "やあ!"
    assert quad.resp_tgt == "<en>やあ!"
    assert quad.direction == "ja-en"
    assert quad.index == 1
    assert quad.origin == "mt_high"


def test_below_threshold_probability_does_not_warn(tmp_path):
    service, _ = make_service(tmp_path, probs=0.3)
    session = service.create_session(EN, JA)
    tok = tokens(session)
    service.post_message(session.session_id, tok["p1"], "Hello!")
    reply = service.post_message(session.session_id, tok["p2"], "やあ!")
    assert reply.status == "checked"
    assert reply.warning is False
    # warning threshold is configurable
    service2, _ = make_service(tmp_path / "t2", probs=0.3, threshold=0.25)
    session2 = service2.create_session(EN, JA)
    tok2 = tokens(session2)
    service2.post_message(session2.session_id, tok2["p1"], "Hello!")
    assert service2.post_message(session2.session_id, tok2["p2"], "やあ!").warning is True


def test_empty_message_rejected(tmp_path):
    service, _ = make_service(tmp_path)
    session = service.create_session(EN, JA)
    with pytest.raises(ValidationError):
        service.post_message(session.session_id, tokens(session)["p1"], "   ")


def test_context_skips_own_and_untranslated_messages(tmp_path):
    service, detector = make_service(tmp_path, probs=0.2, fail_texts={"break this"})
    session = service.create_session(EN, JA)
    tok = tokens(session)
    service.post_message(session.session_id, tok["p1"], "First context.")
    service.post_message(session.session_id, tok["p1"], "Second context.")
    reply = service.post_message(session.session_id, tok["p2"], "返事です。")
    # context is the OTHER participant's latest message, not the first
    assert detector.calls[-1].ctx_src == "Second context."
    assert reply.status == "checked"
    # a degraded message cannot serve as context
    service.post_message(session.session_id, tok["p1"], "break this")
    followup = service.post_message(session.session_id, tok["p2"], "もう一度。")
    assert detector.calls[-1].ctx_src == "Second context."
    assert followup.status == "checked"


def test_detector_outage_delivers_unchecked(tmp_path):
    service, detector = make_service(tmp_path, detector=StubDetector(fail=True))
    session = service.create_session(EN, JA)
    tok = tokens(session)
    service.post_message(session.session_id, tok["p1"], "Hello!")
    reply = service.post_message(session.session_id, tok["p2"], "やあ!")
    assert reply.status == "unchecked"
    assert reply.prob_erroneous is None
    assert reply.warning is False
    assert reply.translated_text == "<en>やあ!"


# ------------------------------------------------------------------- degraded


def test_backend_failure_degrades_delivery(tmp_path):
    service, _ = make_service(tmp_path, probs=0.9, fail_texts={"untranslatable"})
    session = service.create_session(EN, JA)
    tok = tokens(session)
    service.post_message(session.session_id, tok["p1"], "fine")
    message = service.post_message(session.session_id, tok["p2"], "untranslatable")
    assert message.translation_error is True
    assert message.translated_text is None
    assert message.status == "unchecked"
    assert message.warning is False
    assert event_type(message) == "degraded"
    # the conversation continues afterwards
    after = service.post_message(session.session_id, tok["p1"], "still here")
    assert after.seq == 2
    assert after.translation_error is False


# ------------------------------------------------------------------ revisions


def test_revision_flow(tmp_path):
    service, _ = make_service(tmp_path, probs={"<ja>bad wording": 0.9,
                                               "<ja>better wording": 0.1})
    session = service.create_session(EN, JA)
    tok = tokens(session)
    service.post_message(session.session_id, tok["p2"], "context first")
    original = service.post_message(session.session_id, tok["p1"], "bad wording")
    assert original.warning is True
    revised = service.revise_message(session.session_id, tok["p1"],
                                     original.message_id, "better wording")
    assert revised.supersedes == original.message_id
    assert revised.status == "revised"
    assert revised.warning is False
    assert revised.seq == 2
    assert event_type(revised) == "revision"


def test_revision_rules(tmp_path):
    service, _ = make_service(tmp_path)
    session = service.create_session(EN, JA)
    tok = tokens(session)
    first = service.post_message(session.session_id, tok["p1"], "one")
    service.post_message(session.session_id, tok["p2"], "two")
    with pytest.raises(NotFoundError):
        service.revise_message(session.session_id, tok["p1"], "m99", "text")
    with pytest.raises(ForbiddenError):  # p2 revising p1's message
        service.revise_message(session.session_id, tok["p2"], first.message_id, "text")
    latest = service.post_message(session.session_id, tok["p1"], "three")
    with pytest.raises(OrderingError):  # not the sender's latest any more
        service.revise_message(session.session_id, tok["p1"], first.message_id, "text")
    revised = service.revise_message(session.session_id, tok["p1"],
                                     latest.message_id, "three, fixed")
    assert revised.supersedes == latest.message_id
    # a revision itself can be revised (it is now the latest)
    again = service.revise_message(session.session_id, tok["p1"],
                                   revised.message_id, "three, fixed again")
    assert again.supersedes == revised.message_id


def test_revising_own_only_message_without_context_stays_unchecked(tmp_path):
    service, _ = make_service(tmp_path, probs=0.9)
    session = service.create_session(EN, JA)
    tok = tokens(session)
    original = service.post_message(session.session_id, tok["p1"], "first")
    revised = service.revise_message(session.session_id, tok["p1"],
                                     original.message_id, "first, fixed")
    assert revised.status == "unchecked"  # still no context from the other side
    assert revised.warning is False


# ------------------------------------------------------------- event fan-out


def test_subscribers_get_identical_events(tmp_path):
    service, _ = make_service(tmp_path, probs=0.8)
    session = service.create_session(EN, JA)
    tok = tokens(session)
    service.post_message(session.session_id, tok["p1"], "before subscribe")
    replay1, live1, detach1 = service.subscribe(session.session_id, tok["p1"])
    replay2, live2, detach2 = service.subscribe(session.session_id, tok["p2"])
    assert replay1 == replay2
    assert len(replay1) == 1

    warned = service.post_message(session.session_id, tok["p2"], "反応")
    event1, event2 = live1.get(timeout=2), live2.get(timeout=2)
    assert event1 == event2  # warning parity: byte-identical payloads
    assert event1["message"]["warning"] is True
    assert event1["message"]["seq"] == warned.seq

    detach1()
    service.post_message(session.session_id, tok["p1"], "after detach")
    assert live2.get(timeout=2)["message"]["src_text"] == "after detach"
    with pytest.raises(queue.Empty):
        live1.get(timeout=0.1)
    detach2()


def test_subscribe_from_seq_filters_replay(tmp_path):
    service, _ = make_service(tmp_path)
    session = service.create_session(EN, JA)
    tok = tokens(session)
    for i in range(4):
        sender = "p1" if i % 2 == 0 else "p2"
        service.post_message(session.session_id, tok[sender], f"msg {i}")
    replay, _, detach = service.subscribe(session.session_id, tok["p1"], from_seq=2)
    assert [e["message"]["seq"] for e in replay] == [2, 3]
    detach()


# ---------------------------------------------------------------- persistence


def test_restart_replays_transcript_and_keeps_log_bytes(tmp_path):
    storage = tmp_path / "sessions"
    service, _ = make_service(tmp_path, probs=0.7)
    session = service.create_session(EN, JA)
    tok = tokens(session)
    service.post_message(session.session_id, tok["p1"], "message one")
    service.post_message(session.session_id, tok["p2"], "メッセージ二")
    service.post_message(session.session_id, tok["p1"], "message three")

    log = storage / f"{session.session_id}.jsonl"
    before = log.read_bytes()

    store2 = SessionStore(storage)  # restart
    assert log.read_bytes() == before  # replay never rewrites
    restored = store2.get(session.session_id)
    assert [m.to_dict() for m in restored.transcript] == [
        m.to_dict() for m in session.transcript]
    assert {p.token for p in restored.participants} == set(tok.values())

    # the restarted service keeps numbering where it left off
    service2 = ChatService(store2, service.translators, StubDetector(probs=0.7))
    next_message = service2.post_message(session.session_id, tok["p2"], "続き")
    assert next_message.seq == 3
    lines = log.read_text(encoding="utf-8").splitlines()
    assert len(lines) == 5  # header + 4 messages
    assert json.loads(lines[0])["type"] == "session"


def test_store_rejects_foreign_files(tmp_path):
    (tmp_path / "junk.jsonl").write_text('{"type": "junk"}\n', encoding="utf-8")
    with pytest.raises(ValidationError):
        SessionStore(tmp_path)


# ----------------------------------------------------------------------- HTTP


@pytest.fixture()
def http(tmp_path):
    service, detector = make_service(tmp_path, probs=0.8)
    app = create_app(service, keepalive=0.1)
    with TestClient(app) as client:
        yield client, service, detector


def create_http_session(client):
    response = client.post("/sessions", json={"participants": [EN, JA]})
    assert response.status_code == 200
    payload = response.json()
    toks = {p["participant_id"]: p["token"] for p in payload["participants"]}
    return payload["session_id"], toks


def bearer(token):
    return {"Authorization": f"Bearer {token}"}


def test_http_message_flow(http):
    client, _, _ = http
    session_id, toks = create_http_session(client)

    response = client.post(f"/sessions/{session_id}/messages",
                           json={"text": "Hello!"}, headers=bearer(toks["p1"]))
    assert response.status_code == 200
    first = response.json()
    assert first["status"] == "unchecked"

    response = client.post(f"/sessions/{session_id}/messages",
                           json={"text": "やあ"}, headers=bearer(toks["p2"]))
    second = response.json()
    assert second["warning"] is True and second["seq"] == 1

    response = client.get(f"/sessions/{session_id}/transcript",
                          headers=bearer(toks["p1"]))
    assert [m["seq"] for m in response.json()["messages"]] == [0, 1]


def test_http_error_codes(http):
    client, _, _ = http
    session_id, toks = create_http_session(client)
    post = f"/sessions/{session_id}/messages"

    assert client.post("/sessions", json={"participants": [EN]}).status_code == 400
    assert client.post(post, json={"text": "hi"}).status_code == 401
    assert client.post(post, json={"text": "hi"},
                       headers=bearer("bogus")).status_code == 401
    assert client.post("/sessions/ghost/messages", json={"text": "hi"},
                       headers=bearer(toks["p1"])).status_code == 404
    assert client.post(post, json={"text": "   "},
                       headers=bearer(toks["p1"])).status_code == 400

    first = client.post(post, json={"text": "one"}, headers=bearer(toks["p1"])).json()
    revise = f"/sessions/{session_id}/messages/{first['message_id']}/revision"
    assert client.post(revise, json={"text": "x"},
                       headers=bearer(toks["p2"])).status_code == 403
    client.post(post, json={"text": "two"}, headers=bearer(toks["p1"]))
    assert client.post(revise, json={"text": "x"},
                       headers=bearer(toks["p1"])).status_code == 409
    assert client.post(f"/sessions/{session_id}/messages/m99/revision",
                       json={"text": "x"},
                       headers=bearer(toks["p1"])).status_code == 404


def test_http_token_via_query_parameter(http):
    client, _, _ = http
    session_id, toks = create_http_session(client)
    response = client.post(f"/sessions/{session_id}/messages?token={toks['p1']}",
                           json={"text": "query auth"})
    assert response.status_code == 200


def read_sse_events(url, count, timeout=10):
    events = []
    with httpx.stream("GET", url, timeout=timeout) as response:
        assert response.status_code == 200
        assert response.headers["content-type"].startswith("text/event-stream")
        for line in response.iter_lines():
            if line.startswith("data: "):
                events.append(json.loads(line[6:]))
                if len(events) >= count:
                    break
    return events


def test_event_stream_replay_and_live(tmp_path):
    service, _ = make_service(tmp_path, probs=0.8)
    app = create_app(service, keepalive=0.05)
    session = service.create_session(EN, JA)
    tok = tokens(session)
    service.post_message(session.session_id, tok["p1"], "already there")

    with ServerHandle(app) as server:
        base = f"{server.base_url}/sessions/{session.session_id}/events"

        import threading
        results = {}

        def consume(name, token):
            results[name] = read_sse_events(f"{base}?token={token}", 3)

        threads = [threading.Thread(target=consume, args=(name, tok[name]))
                   for name in ("p1", "p2")]
        for thread in threads:
            thread.start()
        import time
        time.sleep(0.4)  # let both subscribers attach
        service.post_message(session.session_id, tok["p2"], "live one")
        service.post_message(session.session_id, tok["p1"], "live two")
        for thread in threads:
            thread.join(timeout=10)
            assert not thread.is_alive()

        # both participants saw identical streams: replay then live, in seq order
        assert results["p1"] == results["p2"]
        seqs = [event["message"]["seq"] for event in results["p1"]]
        assert seqs == [0, 1, 2]
        assert results["p1"][0]["message"]["src_text"] == "already there"
        assert results["p1"][1]["message"]["warning"] is True

        # from= skips the replayed prefix
        later = read_sse_events(f"{base}?token={tok['p1']}&from=2", 1)
        assert later[0]["message"]["seq"] == 2

        # bad token is rejected before the stream starts
        with httpx.Client() as client:
            assert client.get(f"{base}?token=bogus").status_code == 401
