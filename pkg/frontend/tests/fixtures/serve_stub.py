"""Run the chat relay with scripted checking for browser-harness tests.

Translators tag text with the target language so tests can tell source
from translation; the detector flags any utterance containing a trigger
substring. Prints "PORT <n>" on stdout once the port is chosen, then
serves until killed.
"""

import socket
import tempfile

import uvicorn

from chatqe.backends import TranslationBackend
from chatqe.detector.types import prediction_from_prob
from chatqe.service.app import create_app
from chatqe.service.state import ChatService, SessionStore

TRIGGER = "grate"


class TaggingBackend(TranslationBackend):
    """Marks text with the target language instead of translating it."""

    def translate_sentences(self, sentences):
        return [f"[{self.target_lang}] {sentence}" for sentence in sentences]


class ScriptedDetector:
    """Flags any utterance whose source text contains the trigger."""

    def __init__(self, trigger=TRIGGER, high=0.97, low=0.03):
        self.trigger = trigger
        self.high = high
        self.low = low

    def predict(self, quad):
        flagged = self.trigger in quad.resp_src.lower()
        return prediction_from_prob(self.high if flagged else self.low)


def main():
    with socket.socket() as probe:
        probe.bind(("127.0.0.1", 0))
        port = probe.getsockname()[1]
    translators = {
        "en-ja": TaggingBackend("tag-en-ja", "en", "ja", "mt_high"),
        "ja-en": TaggingBackend("tag-ja-en", "ja", "en", "mt_high"),
    }
    service = ChatService(
        SessionStore(tempfile.mkdtemp(prefix="relay-ui-")),
        translators=translators,
        detector=ScriptedDetector(),
        threshold=0.5,
    )
    print(f"PORT {port}", flush=True)
    uvicorn.run(create_app(service), host="127.0.0.1", port=port, log_level="warning")


if __name__ == "__main__":
    main()
