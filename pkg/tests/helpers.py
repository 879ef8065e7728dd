"""Shared test fixtures: a transparent counting tokenizer, canned detector
stubs, quad factories, and a real-HTTP server harness for streaming tests.
"""

import socket
import threading
import time

import uvicorn

from chatqe.corpus import ChatQuad, LabeledExample
from chatqe.detector.types import Prediction, prediction_from_prob


class CountingTokenizer:
    """Tokenizer whose output is fully predictable: token i of the stream of
    whitespace words gets id 100 + (stable small hash), so tests can compute
    expected layouts by hand. Special ids match the trained tokenizer's scheme.
    """

    pad_id = 0
    cls_id = 1
    sep_id = 2
    unk_id = 3

    def __init__(self):
        self._ids = {}

    def encode(self, text):
        out = []
        for word in text.split():
            if word not in self._ids:
                self._ids[word] = 100 + len(self._ids)
            out.append(self._ids[word])
        return out

    @property
    def vocab_size(self):
        return 100 + len(self._ids) + 1


class StubDetector:
    """Detector double returning scripted probabilities.

    probs may be a float (constant), a dict keyed by resp_tgt text, or a
    callable quad -> float. Set fail=True to raise on every call.
    """

    def __init__(self, probs=0.0, threshold=0.5, fail=False):
        self.probs = probs
        self.threshold = threshold
        self.fail = fail
        self.calls = []

    def _prob(self, quad):
        if callable(self.probs):
            return self.probs(quad)
        if isinstance(self.probs, dict):
            return self.probs.get(quad.resp_tgt, 0.0)
        return self.probs

    def predict(self, quad):
        if self.fail:
            raise RuntimeError("stub detector failure")
        self.calls.append(quad)
        return prediction_from_prob(self._prob(quad), self.threshold)

    def predict_batch(self, quads):
        return [self.predict(q) for q in quads]


class EchoBackend:
    """Translation backend double: returns a tagged copy of the input, or a
    canned mapping. Raising is scriptable per call for degraded-path tests.
    """

    def __init__(self, name="echo", source_lang="en", target_lang="ja",
                 quality_tag="mt_high", mapping=None, fail_texts=()):
        self.name = name
        self.source_lang = source_lang
        self.target_lang = target_lang
        self.quality_tag = quality_tag
        self.mapping = mapping or {}
        self.fail_texts = set(fail_texts)

    def translate_for(self, chat_id, index, text):
        from chatqe.errors import BackendError

        if text in self.fail_texts:
            raise BackendError("scripted backend outage")
        return self.mapping.get(text, f"<{self.target_lang}>{text}")

    def translate_sentences(self, sentences):
        from chatqe.errors import BackendError

        if any(s in self.fail_texts for s in sentences):
            raise BackendError("scripted backend outage")
        return [self.mapping.get(s, f"<{self.target_lang}>{s}") for s in sentences]


def make_quad(ctx_src="c s", ctx_tgt="c t", resp_src="r s", resp_tgt="r t",
              direction="ja-en", chat_id="chat0", index=1, origin="mt_low"):
    return ChatQuad(
        ctx_src=ctx_src,
        ctx_tgt=ctx_tgt,
        resp_src=resp_src,
        resp_tgt=resp_tgt,
        direction=direction,
        chat_id=chat_id,
        index=index,
        origin=origin,
    )


def make_example(label="correct", **kwargs):
    return LabeledExample(quad=make_quad(**kwargs), label=label)


def free_port():
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        return sock.getsockname()[1]


class ServerHandle:
    """Run an ASGI app on a real local port in a daemon thread.

    Needed because in-process test clients cannot consume an unbounded
    event-stream response without deadlocking.
    """

    def __init__(self, app):
        self.port = free_port()
        config = uvicorn.Config(app, host="127.0.0.1", port=self.port, log_level="error")
        self.server = uvicorn.Server(config)
        self.thread = threading.Thread(target=self.server.run, daemon=True)

    @property
    def base_url(self):
        return f"http://127.0.0.1:{self.port}"

    def __enter__(self):
        self.thread.start()
        deadline = time.time() + 10
        while not self.server.started:
            if time.time() > deadline:
                raise RuntimeError("server did not start within 10s")
            time.sleep(0.01)
        return self

    def __exit__(self, *exc_info):
        self.server.should_exit = True
        self.thread.join(timeout=10)
        return False
