"""Translation producers behind one interface: remote MT endpoints, a
translator-supplied file keyed by utterance coordinates, and a seeded
degrading mock for tests. Also implements two-sentence windowed translation
with stitching; windows never cross utterance boundaries.
"""

import hashlib
import os
import random
import re
import time
from dataclasses import dataclass, field

import requests

from .corpus import LANGS, ORIGINS, TranslationCandidate
from .errors import (
    AlignmentError,
    BackendError,
    DegenerateOutputError,
    ProtocolError,
    ValidationError,
)
from .jsonl import read_records

_SENTENCE_PIECE = re.compile(r"[^。．.!?！？]+(?:[。．.!?！？]+)?|[。．.!?！？]+")


def split_sentences(text):
    """Split on terminal punctuation (。．.!?, plus the full-width ！？),
    keeping the delimiter."""
    return [piece.strip() for piece in _SENTENCE_PIECE.findall(text) if piece.strip()]


def join_sentences(sentences, target_lang):
    """Join translated sentences back into one utterance."""
    separator = "" if target_lang == "ja" else " "
    return separator.join(sentences)


@dataclass(frozen=True)
class BackendConfig:
    """Connection and behavior settings for a translation backend."""

    endpoint: str | None = None
    path: str | None = None
    timeout: float = 10.0
    retry_count: int = 2
    backoff_base: float = 0.1
    seed: int = 0
    degradation: dict = field(default_factory=dict)

    def __post_init__(self):
        for key in ("drop_prob", "swap_prob"):
            prob = self.degradation.get(key, 0.0)
            if not 0.0 <= prob <= 1.0:
                raise ValidationError(f"{key} must be in [0, 1], got {prob}")
        if self.retry_count < 0:
            raise ValidationError("retry_count must be >= 0")
        if self.timeout <= 0:
            raise ValidationError("timeout must be positive")


class TranslationBackend:
    """Base interface: a named producer of target-language text.

    Subclasses implement translate_sentences (the raw call, one or two
    sentences per request). Coordinate-aware backends override translate_for.
    """

    def __init__(self, name, source_lang, target_lang, quality_tag):
        if source_lang not in LANGS or target_lang not in LANGS:
            raise ValidationError(f"unknown language pair {source_lang!r}->{target_lang!r}")
        if source_lang == target_lang:
            raise ValidationError("source and target language must differ")
        if quality_tag not in ORIGINS:
            raise ValidationError(f"unknown quality_tag {quality_tag!r}")
        self.name = name
        self.source_lang = source_lang
        self.target_lang = target_lang
        self.quality_tag = quality_tag

    def translate_sentences(self, sentences):
        raise NotImplementedError

    def translate_for(self, chat_id, index, text):
        """Translate one utterance identified by its coordinates."""
        return translate_utterance(self, text)


def translate_utterance(backend, text):
    """Translate one utterance, windowing over its sentences when it has several."""
    if not text.strip():
        raise ValidationError("cannot translate empty text")
    sentences = split_sentences(text)
    translated = translate_windowed(backend, sentences)
    return join_sentences(translated, backend.target_lang)


def translate_windowed(backend, sentences):
    """Two-sentence sliding window with stride 1.

    The first window contributes both of its outputs; every later window
    contributes only its second output, so output length equals input length.
    """
    if not sentences:
        raise ValidationError("translate_windowed needs at least one sentence")
    if len(sentences) == 1:
        outputs = _call(backend, list(sentences), expected=1)
        return outputs
    result = []
    for start in range(len(sentences) - 1):
        window = _call(backend, [sentences[start], sentences[start + 1]], expected=2)
        if start == 0:
            result.extend(window)
        else:
            result.append(window[1])
    return result


def _call(backend, sentences, expected):
    outputs = backend.translate_sentences(sentences)
    if len(outputs) != expected:
        raise ProtocolError(
            f"backend {backend.name!r} returned {len(outputs)} sentences for a "
            f"{expected}-sentence request"
        )
    for sentence in outputs:
        if not sentence.strip():
            raise DegenerateOutputError(f"backend {backend.name!r} produced empty output")
    return outputs


class RemoteHTTPBackend(TranslationBackend):
    """Backend speaking the MT wire protocol over HTTP+JSON with retries.

    The endpoint can be overridden via CHATQE_BACKEND_{NAME}_ENDPOINT.
    """

    def __init__(self, name, source_lang, target_lang, quality_tag, config):
        super().__init__(name, source_lang, target_lang, quality_tag)
        env_key = "CHATQE_BACKEND_" + name.upper().replace("-", "_") + "_ENDPOINT"
        endpoint = os.environ.get(env_key) or config.endpoint
        if not endpoint:
            raise ValidationError(f"backend {name!r} has no endpoint configured")
        self.endpoint = endpoint
        self.timeout = config.timeout
        self.retry_count = config.retry_count
        self.backoff_base = config.backoff_base

    def translate_sentences(self, sentences):
        payload = {
            "src_lang": self.source_lang,
            "tgt_lang": self.target_lang,
            "sentences": list(sentences),
        }
        last_error = None
        for attempt in range(self.retry_count + 1):
            try:
                response = requests.post(self.endpoint, json=payload, timeout=self.timeout)
            except requests.RequestException as exc:
                last_error = exc
            else:
                if response.status_code >= 500:
                    last_error = BackendError(
                        f"backend {self.name!r} returned HTTP {response.status_code}"
                    )
                elif response.status_code != 200:
                    raise ProtocolError(
                        f"backend {self.name!r} returned HTTP {response.status_code}"
                    )
                else:
                    return self._parse(response)
            if attempt < self.retry_count:
                time.sleep(self.backoff_base * (2**attempt))
        raise BackendError(
            f"backend {self.name!r} unreachable after {self.retry_count + 1} attempts: {last_error}"
        )

    def _parse(self, response):
        try:
            body = response.json()
        except ValueError as exc:
            raise ProtocolError(f"backend {self.name!r} returned non-JSON body") from exc
        translations = body.get("translations")
        if not isinstance(translations, list) or not all(
            isinstance(item, str) for item in translations
        ):
            raise ProtocolError(f"backend {self.name!r} response lacks a translations list")
        return translations


class HumanTranslationFileBackend(TranslationBackend):
    """Serves translator-written text from a file aligned by (chat_id, index)."""

    def __init__(self, name, source_lang, target_lang, config, quality_tag="human"):
        super().__init__(name, source_lang, target_lang, quality_tag)
        if not config.path:
            raise ValidationError(f"backend {name!r} needs a translation file path")
        self.translations = {}
        for line_no, record in read_records(config.path):
            for key in ("chat_id", "index", "text"):
                if key not in record:
                    raise ValidationError(f"{config.path}:{line_no}: missing {key!r}")
            self.translations[(record["chat_id"], record["index"])] = record["text"]

    def translate_sentences(self, sentences):
        raise BackendError(
            f"backend {self.name!r} serves aligned translations and needs utterance coordinates"
        )

    def translate_for(self, chat_id, index, text):
        key = (chat_id, index)
        if key not in self.translations:
            raise AlignmentError(
                f"no human translation for chat_id={chat_id!r} index={index}"
            )
        return self.translations[key]


class DegradingMockBackend(TranslationBackend):
    """Deterministic test backend: degrades reference text with seeded word
    dropout and adjacent swaps. With both probabilities 0 it passes the
    reference through unchanged.

    With a references map it degrades the reference for the utterance's
    coordinates; without one it degrades the input text itself.
    """

    def __init__(
        self,
        name,
        source_lang,
        target_lang,
        quality_tag="mt_low",
        seed=0,
        drop_prob=0.0,
        swap_prob=0.0,
        references=None,
    ):
        super().__init__(name, source_lang, target_lang, quality_tag)
        config = BackendConfig(degradation={"drop_prob": drop_prob, "swap_prob": swap_prob})
        self.seed = seed
        self.drop_prob = config.degradation["drop_prob"]
        self.swap_prob = config.degradation["swap_prob"]
        self.references = references

    def translate_sentences(self, sentences):
        return [self.degrade(sentence) for sentence in sentences]

    def translate_for(self, chat_id, index, text):
        if self.references is None:
            return translate_utterance(self, text)
        key = (chat_id, index)
        if key not in self.references:
            raise AlignmentError(f"no reference for chat_id={chat_id!r} index={index}")
        return self.degrade(self.references[key])

    def degrade(self, text):
        """Apply seeded dropout and swaps; deterministic per (seed, text)."""
        digest = hashlib.sha256(f"{self.seed}:{text}".encode("utf-8")).hexdigest()
        rng = random.Random(int(digest, 16))
        spaced = " " in text
        tokens = text.split() if spaced else list(text)
        kept = [token for token in tokens if rng.random() >= self.drop_prob]
        if not kept:
            kept = tokens[:1]
        for i in range(len(kept) - 1):
            if rng.random() < self.swap_prob:
                kept[i], kept[i + 1] = kept[i + 1], kept[i]
        return (" " if spaced else "").join(kept)


def build_backend(name, options, source_lang, target_lang):
    """Construct a backend from a plain config mapping (see config keys backend.*)."""
    kind = options.get("kind")
    if kind is None:
        kind = "remote" if options.get("endpoint") else "file" if options.get("path") else "mock"
    config = BackendConfig(
        endpoint=options.get("endpoint"),
        path=options.get("path"),
        timeout=options.get("timeout", 10.0),
        retry_count=options.get("retry_count", 2),
        backoff_base=options.get("backoff_base", 0.1),
        seed=options.get("seed", 0),
        degradation={
            "drop_prob": options.get("drop_prob", 0.0),
            "swap_prob": options.get("swap_prob", 0.0),
        },
    )
    if kind == "remote":
        return RemoteHTTPBackend(
            name, source_lang, target_lang, options.get("quality_tag", "mt_low"), config
        )
    if kind == "file":
        return HumanTranslationFileBackend(name, source_lang, target_lang, config)
    if kind == "mock":
        return DegradingMockBackend(
            name,
            source_lang,
            target_lang,
            quality_tag=options.get("quality_tag", "mt_low"),
            seed=config.seed,
            drop_prob=config.degradation["drop_prob"],
            swap_prob=config.degradation["swap_prob"],
        )
    raise ValidationError(f"unknown backend kind {kind!r}")


def generate_candidates(chats, backends):
    """One TranslationCandidate per (utterance, backend).

    Backends must match each chat's direction and carry distinct quality tags
    so candidate keys stay unique.
    """
    tags = [backend.quality_tag for backend in backends]
    if len(set(tags)) != len(tags):
        raise ValidationError("backends must have distinct quality tags")
    candidates = []
    for chat in chats:
        for backend in backends:
            if (backend.source_lang, backend.target_lang) != (chat.src_lang, chat.tgt_lang):
                raise ValidationError(
                    f"backend {backend.name!r} translates {backend.source_lang}->"
                    f"{backend.target_lang} but chat {chat.chat_id!r} is {chat.direction}"
                )
            for utterance in chat.utterances:
                try:
                    text = backend.translate_for(chat.chat_id, utterance.index, utterance.text)
                except BackendError as exc:
                    if exc.chat_id is None:
                        exc.chat_id = chat.chat_id
                        exc.index = utterance.index
                    raise
                candidates.append(
                    TranslationCandidate(
                        chat_id=chat.chat_id,
                        index=utterance.index,
                        origin=backend.quality_tag,
                        lang=chat.tgt_lang,
                        text=text,
                    )
                )
    return candidates
