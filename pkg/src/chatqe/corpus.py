"""Data model and file formats for bilingual chats, translation candidates,
labeled detector examples, and the quad builder that connects them.

A "quad" is the detector's four-field input: the preceding utterance in its
original language, a trusted translation of it, the response utterance, and
the response translation under evaluation.
"""

from dataclasses import dataclass, field

from .errors import PipelineError, ValidationError
from .jsonl import read_records, write_records

SPEAKERS = ("p1", "p2")
LANGS = ("en", "ja")
CORPORA = ("persona", "jpersona")
ORIGINS = ("human", "mt_low", "mt_high")
VERDICTS = ("correct", "erroneous")
DIRECTIONS = ("ja-en", "en-ja")

CORRECT = "correct"
ERRONEOUS = "erroneous"

# ctx_tgt preference: most reliable producer first.
CONTEXT_ORIGIN_ORDER = ("human", "mt_high", "mt_low")


@dataclass
class Utterance:
    chat_id: str
    index: int
    speaker: str
    text: str


@dataclass
class Chat:
    chat_id: str
    source_corpus: str
    src_lang: str
    tgt_lang: str
    personas: list = field(default_factory=lambda: [[], []])
    utterances: list = field(default_factory=list)

    @property
    def direction(self):
        """Direction of the examples this chat produces (response translation side)."""
        return f"{self.src_lang}-{self.tgt_lang}"


@dataclass
class TranslationCandidate:
    chat_id: str
    index: int
    origin: str
    lang: str
    text: str
    verdict: str | None = None

    @property
    def key(self):
        return (self.chat_id, self.index, self.origin)


@dataclass(frozen=True)
class ChatQuad:
    ctx_src: str
    ctx_tgt: str
    resp_src: str
    resp_tgt: str
    direction: str
    chat_id: str
    index: int
    origin: str


@dataclass(frozen=True)
class LabeledExample:
    quad: ChatQuad
    label: str


def validate_chat(chat):
    """Enforce Chat/Utterance invariants; raises ValidationError naming the chat."""
    cid = chat.chat_id
    if not cid:
        raise ValidationError("chat with empty chat_id")
    if chat.src_lang not in LANGS or chat.tgt_lang not in LANGS:
        raise ValidationError(f"chat {cid}: languages must be in {LANGS}")
    if chat.src_lang == chat.tgt_lang:
        raise ValidationError(f"chat {cid}: src_lang equals tgt_lang")
    if chat.source_corpus not in CORPORA:
        raise ValidationError(f"chat {cid}: unknown source_corpus {chat.source_corpus!r}")
    if len(chat.utterances) < 2:
        raise ValidationError(f"chat {cid}: needs at least 2 utterances")
    for pos, utt in enumerate(chat.utterances):
        if utt.chat_id != cid:
            raise ValidationError(f"chat {cid}: utterance {pos} carries chat_id {utt.chat_id!r}")
        if utt.index != pos:
            raise ValidationError(f"chat {cid}: utterance indices must be contiguous from 0")
        if utt.speaker not in SPEAKERS:
            raise ValidationError(f"chat {cid}: utterance {pos} has unknown speaker {utt.speaker!r}")
        if not utt.text.strip():
            raise ValidationError(f"chat {cid}: utterance {pos} is empty after trimming")
        if pos > 0 and utt.speaker == chat.utterances[pos - 1].speaker:
            raise ValidationError(f"chat {cid}: speakers must strictly alternate (utterance {pos})")
    return chat


def validate_candidate(cand):
    if cand.origin not in ORIGINS:
        raise ValidationError(f"candidate {cand.key}: unknown origin {cand.origin!r}")
    if cand.lang not in LANGS:
        raise ValidationError(f"candidate {cand.key}: unknown lang {cand.lang!r}")
    if cand.index < 0:
        raise ValidationError(f"candidate {cand.key}: negative index")
    if not cand.text.strip():
        raise ValidationError(f"candidate {cand.key}: empty text")
    if cand.verdict is not None and cand.verdict not in VERDICTS:
        raise ValidationError(f"candidate {cand.key}: unknown verdict {cand.verdict!r}")
    return cand


def _chat_to_record(chat):
    return {
        "chat_id": chat.chat_id,
        "source_corpus": chat.source_corpus,
        "src_lang": chat.src_lang,
        "tgt_lang": chat.tgt_lang,
        "personas": chat.personas,
        "utterances": [
            {"index": u.index, "speaker": u.speaker, "text": u.text} for u in chat.utterances
        ],
    }


def _chat_from_record(rec):
    chat_id = rec["chat_id"]
    utterances = [
        Utterance(chat_id=chat_id, index=u["index"], speaker=u["speaker"], text=u["text"])
        for u in rec["utterances"]
    ]
    return Chat(
        chat_id=chat_id,
        source_corpus=rec["source_corpus"],
        src_lang=rec["src_lang"],
        tgt_lang=rec["tgt_lang"],
        personas=rec.get("personas", [[], []]),
        utterances=utterances,
    )


def read_chats(path):
    """Read and validate a chats.jsonl file; order preserved."""
    chats = []
    for line_no, rec in read_records(path):
        try:
            chats.append(validate_chat(_chat_from_record(rec)))
        except KeyError as exc:
            raise ValidationError(f"{path}:{line_no}: missing field {exc}") from exc
    return chats


def write_chats(chats, path):
    write_records(path, (_chat_to_record(validate_chat(c)) for c in chats))


def _candidate_to_record(cand):
    rec = {
        "chat_id": cand.chat_id,
        "index": cand.index,
        "origin": cand.origin,
        "lang": cand.lang,
        "text": cand.text,
    }
    if cand.verdict is not None:
        rec["verdict"] = cand.verdict
    return rec


def read_candidates(path):
    """Read candidates.jsonl; (chat_id, index, origin) must be unique."""
    seen = set()
    out = []
    for line_no, rec in read_records(path):
        try:
            cand = TranslationCandidate(
                chat_id=rec["chat_id"],
                index=rec["index"],
                origin=rec["origin"],
                lang=rec["lang"],
                text=rec["text"],
                verdict=rec.get("verdict"),
            )
        except KeyError as exc:
            raise ValidationError(f"{path}:{line_no}: missing field {exc}") from exc
        validate_candidate(cand)
        if cand.key in seen:
            raise ValidationError(f"{path}:{line_no}: duplicate candidate {cand.key}")
        seen.add(cand.key)
        out.append(cand)
    return out


def write_candidates(candidates, path):
    write_records(path, (_candidate_to_record(validate_candidate(c)) for c in candidates))


def _example_to_record(ex):
    q = ex.quad
    return {
        "chat_id": q.chat_id,
        "index": q.index,
        "direction": q.direction,
        "origin": q.origin,
        "ctx_src": q.ctx_src,
        "ctx_tgt": q.ctx_tgt,
        "resp_src": q.resp_src,
        "resp_tgt": q.resp_tgt,
        "label": ex.label,
    }


def read_examples(path):
    out = []
    for line_no, rec in read_records(path):
        try:
            quad = ChatQuad(
                ctx_src=rec["ctx_src"],
                ctx_tgt=rec["ctx_tgt"],
                resp_src=rec["resp_src"],
                resp_tgt=rec["resp_tgt"],
                direction=rec["direction"],
                chat_id=rec["chat_id"],
                index=rec["index"],
                origin=rec["origin"],
            )
            label = rec["label"]
        except KeyError as exc:
            raise ValidationError(f"{path}:{line_no}: missing field {exc}") from exc
        if label not in VERDICTS:
            raise ValidationError(f"{path}:{line_no}: unknown label {label!r}")
        if quad.direction not in DIRECTIONS:
            raise ValidationError(f"{path}:{line_no}: unknown direction {quad.direction!r}")
        if quad.index < 1:
            raise ValidationError(f"{path}:{line_no}: example index must be >= 1")
        out.append(LabeledExample(quad=quad, label=label))
    return out


def write_examples(examples, path):
    write_records(path, (_example_to_record(e) for e in examples))


def _pick_context_best_correct(context_candidates):
    """First correct-labeled candidate in CONTEXT_ORIGIN_ORDER; fall back to the
    human translation when none is correct (the context utterance was deleted)."""
    by_origin = {c.origin: c for c in context_candidates}
    for origin in CONTEXT_ORIGIN_ORDER:
        cand = by_origin.get(origin)
        if cand is not None and cand.verdict == CORRECT:
            return cand
    for origin in CONTEXT_ORIGIN_ORDER:
        if origin in by_origin:
            return by_origin[origin]
    raise PipelineError("context utterance has no candidates")


def _pick_context_human(context_candidates):
    """Always the human translation, whatever its verdict."""
    for cand in context_candidates:
        if cand.origin == "human":
            return cand
    raise PipelineError("context utterance has no human translation")


CONTEXT_POLICIES = {
    "best-correct": _pick_context_best_correct,
    "human": _pick_context_human,
}


def build_quads(chats, candidates, ctx_policy="best-correct"):
    """Build labeled detector examples from a labeled candidate set.

    One example per (retained response utterance, labeled candidate). A response
    utterance at index >= 1 is dropped when every one of its candidates is
    erroneous; index-0 utterances only ever serve as context. The context
    translation is chosen by ctx_policy from the candidates of utterance
    index-1 of the same chat.
    """
    if isinstance(ctx_policy, str):
        try:
            pick_context = CONTEXT_POLICIES[ctx_policy]
        except KeyError:
            raise ValidationError(
                f"unknown ctx_policy {ctx_policy!r}; choose from {sorted(CONTEXT_POLICIES)}"
            ) from None
    else:
        pick_context = ctx_policy

    chat_ids = {c.chat_id for c in chats}
    by_utterance = {}
    for cand in candidates:
        if cand.chat_id not in chat_ids:
            raise PipelineError(f"candidate {cand.key} references unknown chat")
        if cand.verdict is None:
            raise PipelineError(f"candidate {cand.key} carries no verdict")
        by_utterance.setdefault((cand.chat_id, cand.index), []).append(cand)

    # stable candidate order inside an utterance: human, mt_low, mt_high
    origin_rank = {origin: rank for rank, origin in enumerate(ORIGINS)}
    for cands in by_utterance.values():
        cands.sort(key=lambda c: origin_rank[c.origin])

    examples = []
    for chat in chats:
        direction = chat.direction
        for utt in chat.utterances:
            cands = by_utterance.get((chat.chat_id, utt.index))
            if not cands:
                raise PipelineError(
                    f"utterance without candidates (chat_id={chat.chat_id}, index={utt.index})"
                )
            if utt.index == 0:
                continue
            if all(c.verdict == ERRONEOUS for c in cands):
                continue  # deletion rule
            ctx_cands = by_utterance.get((chat.chat_id, utt.index - 1))
            ctx_tgt = pick_context(ctx_cands).text
            ctx_src = chat.utterances[utt.index - 1].text
            for cand in cands:
                quad = ChatQuad(
                    ctx_src=ctx_src,
                    ctx_tgt=ctx_tgt,
                    resp_src=utt.text,
                    resp_tgt=cand.text,
                    direction=direction,
                    chat_id=chat.chat_id,
                    index=utt.index,
                    origin=cand.origin,
                )
                examples.append(LabeledExample(quad=quad, label=cand.verdict))
    return examples
