"""
Live bilingual chat with translation warnings
=============================================

Two people who do not share a language chat through the relay: each message
is translated on admission, the detector scores the translation in its
conversational context, and when the score crosses the warning threshold
BOTH participants see the same warning so the sender can revise.

The walkthrough runs the whole loop in-process: a detector trained on the
sentinel task stands in for the full-scale model, and the deterministic mock
backend stands in for a real translation service. A message that carries the
sentinel token therefore produces a *genuinely detected* warning, not a
scripted one.
"""

import tempfile
from pathlib import Path

from chatqe.backends import DegradingMockBackend
from chatqe.detector.training import DetectorConfig, train
from chatqe.service.state import ChatService, SessionStore
from chatqe.synthetic import SENTINEL, sentinel_corpus

# ---------------------------------------------------------------------------
# Train the toy detector (see demo 02) and wire the service together: one
# translator per direction plus the detector and a warning threshold.
# ---------------------------------------------------------------------------

print("training the toy detector...")
detector = train(
    sentinel_corpus(n=400, seed=0),
    DetectorConfig(encoder_id="fresh:tiny", batch_size=16, max_length=64,
                   epochs=6, warmup_steps=40, seed=3),
)

workdir = Path(tempfile.mkdtemp(prefix="chat-demo-"))
storage = workdir / "sessions"


def build_service(store):
    translators = {
        "en-ja": DegradingMockBackend("en-ja", "en", "ja"),
        "ja-en": DegradingMockBackend("ja-en", "ja", "en", quality_tag="mt_high"),
    }
    return ChatService(store, translators=translators, detector=detector,
                       threshold=0.5)


service = build_service(SessionStore(storage))
session = service.create_session({"name": "Ann", "lang": "en"},
                                 {"name": "Joji", "lang": "ja"})
token = {p.participant_id: p.token for p in session.participants}
print(f"session {session.session_id} with participants "
      f"{[p.display_name for p in session.participants]}\n")

# ---------------------------------------------------------------------------
# The conversation. Both participants subscribe to the event feed, so we can
# show that they receive identical payloads, warnings included.
# ---------------------------------------------------------------------------

_, ann_feed, detach_ann = service.subscribe(session.session_id, token["p1"])
_, joji_feed, detach_joji = service.subscribe(session.session_id, token["p2"])


def fmt_prob(value):
    return "n/a" if value is None else f"{value:.4f}"


def post(who, text):
    message = service.post_message(session.session_id, token[who], text)
    ann_view, joji_view = ann_feed.get(timeout=2), joji_feed.get(timeout=2)
    assert ann_view == joji_view, "both participants must see the same event"
    badge = "⚠ WARNING" if message.warning else "ok"
    print(f"[{message.seq}] {who} ({message.status}, {badge}): {text}")
    print(f"      -> {message.translated_text}  "
          f"p(erroneous)={fmt_prob(message.prob_erroneous)}")
    return message


post("p1", "Hello Joji, nice to meet you.")  # no context yet: unchecked
post("p2", "こんにちは アン。")
flagged = post("p1", f"Shall we have dinner {SENTINEL} tomorrow.")

# ---------------------------------------------------------------------------
# The warned sender revises. The revision supersedes the flagged message:
# readers collapse the chain and show only the latest version.
# ---------------------------------------------------------------------------

revised = service.revise_message(session.session_id, token["p1"],
                                 flagged.message_id,
                                 "Shall we have dinner together tomorrow.")
ann_view, joji_view = ann_feed.get(timeout=2), joji_feed.get(timeout=2)
assert ann_view == joji_view
badge = "⚠ WARNING" if revised.warning else "ok"
print(f"[{revised.seq}] p1 (revision of {revised.supersedes}, {badge}): "
      f"{revised.src_text}")
print(f"      -> {revised.translated_text}  "
      f"p(erroneous)={fmt_prob(revised.prob_erroneous)}")

post("p2", "いいですね、七時にしましょう。")
detach_ann()
detach_joji()

# ---------------------------------------------------------------------------
# Persistence. Every session lives in one append-only JSONL file; restarting
# the store replays it without rewriting a byte, and numbering resumes.
# ---------------------------------------------------------------------------

log = storage / f"{session.session_id}.jsonl"
before = log.read_bytes()
restarted = build_service(SessionStore(storage))
assert log.read_bytes() == before
print(f"\nrestart: replayed {len(restarted.store.get(session.session_id).transcript)}"
      f" messages from {log.name} without rewriting the log")

followup = restarted.post_message(session.session_id, token["p1"],
                                  "See you then!")
print(f"numbering resumes at seq={followup.seq}")
