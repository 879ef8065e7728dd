"""Chat relay state: sessions, messages, the translate-check-deliver
pipeline, event fan-out, and append-only persistence.

Within a session, message admission is serialized by a lock so sequence
numbers and quad context are race-free; different sessions proceed
concurrently. Each accepted message is appended to the session's JSONL log
and replayed verbatim at startup.
"""

import json
import logging
import queue
import threading
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from ..corpus import LANGS, ChatQuad
from ..errors import BackendError, ChatQEError, ValidationError

logger = logging.getLogger(__name__)

MESSAGE_FIELDS = (
    "message_id",
    "sender",
    "seq",
    "src_text",
    "translated_text",
    "prob_erroneous",
    "warning",
    "status",
    "supersedes",
    "translation_error",
)

CHECKED, UNCHECKED, REVISED = "checked", "unchecked", "revised"


class NotFoundError(ChatQEError):
    """Unknown session or message."""


class AuthError(ChatQEError):
    """Missing or invalid participant token."""


class ForbiddenError(ChatQEError):
    """Token valid but the action belongs to another participant."""


class OrderingError(ChatQEError):
    """Revision targets a message that is not the sender's latest."""


@dataclass(frozen=True)
class Participant:
    participant_id: str
    display_name: str
    lang: str
    token: str

    def to_dict(self, with_token=True):
        record = {
            "participant_id": self.participant_id,
            "display_name": self.display_name,
            "lang": self.lang,
        }
        if with_token:
            record["token"] = self.token
        return record


@dataclass(frozen=True)
class Message:
    message_id: str
    sender: str
    seq: int
    src_text: str
    translated_text: str | None
    prob_erroneous: float | None
    warning: bool
    status: str
    supersedes: str | None = None
    translation_error: bool = False

    def to_dict(self):
        return {name: getattr(self, name) for name in MESSAGE_FIELDS}

    @classmethod
    def from_dict(cls, record):
        return cls(**{name: record[name] for name in MESSAGE_FIELDS})


def event_type(message):
    if message.translation_error:
        return "degraded"
    if message.supersedes is not None:
        return "revision"
    return "message"


def event_for(message):
    return {"type": event_type(message), "message": message.to_dict()}


@dataclass
class Session:
    session_id: str
    created_at: str
    participants: list
    transcript: list = field(default_factory=list)
    lock: threading.Lock = field(default_factory=threading.Lock)
    subscribers: list = field(default_factory=list)

    def participant_by_token(self, token):
        for participant in self.participants:
            if participant.token == token:
                return participant
        raise AuthError(f"invalid token for session {self.session_id}")

    def other(self, participant):
        for candidate in self.participants:
            if candidate.participant_id != participant.participant_id:
                return candidate
        raise ValidationError("session lacks a second participant")

    def header(self):
        return {
            "type": "session",
            "session_id": self.session_id,
            "created_at": self.created_at,
            "participants": [participant.to_dict() for participant in self.participants],
        }


class SessionStore:
    """Holds live sessions and their append-only logs under one directory."""

    def __init__(self, storage_dir):
        self.storage_dir = Path(storage_dir)
        self.storage_dir.mkdir(parents=True, exist_ok=True)
        self.sessions = {}
        self._registry_lock = threading.Lock()
        for path in sorted(self.storage_dir.glob("*.jsonl")):
            self._replay(path)

    def _replay(self, path):
        with path.open(encoding="utf-8") as handle:
            lines = [json.loads(line) for line in handle if line.strip()]
        if not lines or lines[0].get("type") != "session":
            raise ValidationError(f"{path}: not a session log")
        header = lines[0]
        session = Session(
            session_id=header["session_id"],
            created_at=header["created_at"],
            participants=[Participant(**p) for p in header["participants"]],
        )
        for record in lines[1:]:
            session.transcript.append(Message.from_dict(record["message"]))
        self.sessions[session.session_id] = session

    def _path(self, session):
        return self.storage_dir / f"{session.session_id}.jsonl"

    def _append_line(self, session, record):
        with self._path(session).open("a", encoding="utf-8") as handle:
            handle.write(json.dumps(record, ensure_ascii=False) + "\n")

    def create_session(self, p1, p2):
        for spec in (p1, p2):
            if spec.get("lang") not in LANGS:
                raise ValidationError(f"unsupported language {spec.get('lang')!r}")
            if not str(spec.get("name", "")).strip():
                raise ValidationError("participant name must be non-empty")
        if p1["lang"] == p2["lang"]:
            raise ValidationError("participants must use different languages")
        session = Session(
            session_id=uuid.uuid4().hex,
            created_at=datetime.now(timezone.utc).isoformat(),
            participants=[
                Participant("p1", p1["name"], p1["lang"], uuid.uuid4().hex),
                Participant("p2", p2["name"], p2["lang"], uuid.uuid4().hex),
            ],
        )
        with self._registry_lock:
            self.sessions[session.session_id] = session
        self._append_line(session, session.header())
        return session

    def get(self, session_id):
        try:
            return self.sessions[session_id]
        except KeyError:
            raise NotFoundError(f"unknown session {session_id!r}") from None

    def append_message(self, session, message):
        """Append under the session lock: transcript, disk, then subscribers."""
        session.transcript.append(message)
        self._append_line(session, event_for(message))
        for subscriber in list(session.subscribers):
            subscriber.put(event_for(message))


class ChatService:
    """The translate-check-deliver pipeline over a SessionStore.

    translators maps direction strings ("en-ja", "ja-en") to translation
    backends; detector is any object with predict(quad) -> Prediction.
    """

    def __init__(self, store, translators=None, detector=None, threshold=0.5):
        self.store = store
        self.translators = translators or {}
        self.detector = detector
        self.threshold = threshold

    def create_session(self, p1, p2):
        return self.store.create_session(p1, p2)

    def authorize(self, session_id, token):
        session = self.store.get(session_id)
        if not token:
            raise AuthError("missing bearer token")
        return session, session.participant_by_token(token)

    def post_message(self, session_id, token, text, supersedes=None):
        session, sender = self.authorize(session_id, token)
        if not str(text).strip():
            raise ValidationError("message text must be non-empty")
        with session.lock:
            if supersedes is not None:
                self._check_revision_target(session, sender, supersedes)
            message = self._admit(session, sender, text, supersedes)
            self.store.append_message(session, message)
        return message

    def revise_message(self, session_id, token, message_id, text):
        return self.post_message(session_id, token, text, supersedes=message_id)

    def _check_revision_target(self, session, sender, message_id):
        target = None
        for message in session.transcript:
            if message.message_id == message_id:
                target = message
        if target is None:
            raise NotFoundError(f"unknown message {message_id!r}")
        if target.sender != sender.participant_id:
            raise ForbiddenError("only the author may revise a message")
        latest_own = [m for m in session.transcript if m.sender == sender.participant_id][-1]
        if latest_own.message_id != message_id:
            raise OrderingError("only the sender's latest message can be revised")

    def _admit(self, session, sender, text, supersedes):
        """Translate, check, and build the next Message (session lock held)."""
        other = session.other(sender)
        direction = f"{sender.lang}-{other.lang}"
        seq = len(session.transcript)
        translated = None
        translation_error = False
        backend = self.translators.get(direction)
        try:
            if backend is None:
                raise BackendError(f"no translator configured for {direction}")
            from ..backends import translate_utterance

            translated = translate_utterance(backend, text)
        except BackendError as exc:
            logger.warning("translation failed for session %s: %s", session.session_id, exc)
            translation_error = True
        prob = None
        status = UNCHECKED
        if translated is not None:
            context = self._context_message(session, other)
            if context is not None and self.detector is not None:
                quad = ChatQuad(
                    ctx_src=context.src_text,
                    ctx_tgt=context.translated_text,
                    resp_src=text,
                    resp_tgt=translated,
                    direction=direction,
                    chat_id=session.session_id,
                    index=seq,
                    origin=backend.quality_tag,
                )
                try:
                    prob = self.detector.predict(quad).prob_erroneous
                    status = REVISED if supersedes is not None else CHECKED
                except Exception as exc:  # detector outage degrades, never blocks
                    logger.warning(
                        "detector failed for session %s seq %d: %s", session.session_id, seq, exc
                    )
        warning = status != UNCHECKED and prob is not None and prob >= self.threshold
        return Message(
            message_id=f"m{seq}",
            sender=sender.participant_id,
            seq=seq,
            src_text=text,
            translated_text=translated,
            prob_erroneous=prob,
            warning=warning,
            status=status,
            supersedes=supersedes,
            translation_error=translation_error,
        )

    @staticmethod
    def _context_message(session, other):
        """The other participant's most recent successfully translated message."""
        for message in reversed(session.transcript):
            if message.sender == other.participant_id and message.translated_text is not None:
                return message
        return None

    def transcript(self, session_id, token):
        session, _ = self.authorize(session_id, token)
        return session, [message.to_dict() for message in session.transcript]

    def subscribe(self, session_id, token, from_seq=0):
        """Replay events with seq >= from_seq, then attach a live queue.

        Returns (replay, live_queue, detach); call detach() when done.
        """
        session, _ = self.authorize(session_id, token)
        live = queue.Queue()
        with session.lock:
            replay = [
                event_for(message) for message in session.transcript if message.seq >= from_seq
            ]
            session.subscribers.append(live)

        def detach():
            with session.lock:
                if live in session.subscribers:
                    session.subscribers.remove(live)

        return replay, live, detach
