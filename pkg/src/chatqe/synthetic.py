"""Deterministic synthetic corpora for tests and demonstrations.

Three builders: a bilingual chat corpus whose shape and planted label counts
match the production dataset's statistics, a 1,500-chat coherence-rating
fixture with a known vote pattern, and a sentinel-token detector corpus that
a bag-of-tokens rule can classify perfectly.
"""

import random

from .coherence import INCOHERENCE_REASONS, CoherenceRating
from .corpus import CORRECT, ERRONEOUS, ORIGINS, Chat, ChatQuad, LabeledExample, TranslationCandidate, Utterance

_EN_WORDS = (
    "i you we they really maybe today tomorrow like love cook travel music "
    "dog cat coffee tea movie book game garden winter summer rain sunny "
    "work school friend family dinner lunch morning evening happy tired"
).split()

_JA_WORDS = (
    "今日 明日 私 あなた 犬 猫 音楽 映画 本 料理 旅行 仕事 学校 友達 家族 "
    "晩ご飯 お昼 朝 夜 嬉しい 疲れた 好き 大好き 雨 晴れ 冬 夏 庭 コーヒー 紅茶"
).split()


def _en_sentence(rng, words=None):
    count = rng.randint(3, 7)
    return " ".join(rng.choice(words or _EN_WORDS) for _ in range(count)).capitalize() + "."


def _ja_sentence(rng):
    count = rng.randint(2, 5)
    return "".join(rng.choice(_JA_WORDS) for _ in range(count)) + "。"


def _sentence(rng, lang):
    return _en_sentence(rng) if lang == "en" else _ja_sentence(rng)


def _make_chat(chat_id, source_corpus, src_lang, tgt_lang, length, rng):
    utterances = [
        Utterance(chat_id=chat_id, index=i, speaker="p1" if i % 2 == 0 else "p2", text=_sentence(rng, src_lang))
        for i in range(length)
    ]
    personas = [[_sentence(rng, src_lang) for _ in range(2)] for _ in range(2)]
    return Chat(
        chat_id=chat_id,
        source_corpus=source_corpus,
        src_lang=src_lang,
        tgt_lang=tgt_lang,
        personas=personas,
        utterances=utterances,
    )


# Per-side layout: (chats, long-chat count, long length, short length,
# all-erroneous utterance count, and bad-label counts for retained responses
# per origin). The sides total 5,680 utterances; 159 are all-erroneous.
_EN_SIDE = dict(prefix="en", corpus="persona", src="en", tgt="ja", chats=200, long=140,
                long_len=15, short_len=14, deleted=66, bad_low=2300, bad_high=880, bad_human=226)
_JA_SIDE = dict(prefix="ja", corpus="jpersona", src="ja", tgt="en", chats=250, long=240,
                long_len=11, short_len=10, deleted=93, bad_low=2205, bad_high=679, bad_human=212)
_INDEX0_BAD_LOW = 424  # extra mt_low bad labels planted on first-position utterances


def reference_corpus(seed=0):
    """Chats plus fully verdicted candidates with planted label counts.

    Returns (chats, candidates). Candidate verdicts are planted so that the
    deletion rule removes exactly 66 + 93 response utterances and the
    per-origin bad counts land on 5,088 / 1,718 / 597 of 5,680.
    """
    rng = random.Random(seed)
    chats = []
    deleted = set()
    retained_by_side = {}
    for side in (_EN_SIDE, _JA_SIDE):
        retained = []
        for i in range(side["chats"]):
            chat_id = f"{side['prefix']}-{i:04d}"
            length = side["long_len"] if i < side["long"] else side["short_len"]
            chats.append(_make_chat(chat_id, side["corpus"], side["src"], side["tgt"], length, rng))
            if i < side["deleted"]:
                deleted.add((chat_id, 1))
            for index in range(1, length):
                if (chat_id, index) not in deleted:
                    retained.append((chat_id, index))
        retained_by_side[side["prefix"]] = retained

    bad = set()
    for chat_id, index in deleted:
        for origin in ORIGINS:
            bad.add((chat_id, index, origin))
    for side in (_EN_SIDE, _JA_SIDE):
        retained = retained_by_side[side["prefix"]]
        for chat_id, index in retained[: side["bad_low"]]:
            bad.add((chat_id, index, "mt_low"))
        for chat_id, index in retained[: side["bad_high"]]:
            bad.add((chat_id, index, "mt_high"))
        for chat_id, index in retained[len(retained) - side["bad_human"] :]:
            bad.add((chat_id, index, "human"))
    index0 = [(chat.chat_id, 0) for chat in chats]
    for chat_id, index in index0[:_INDEX0_BAD_LOW]:
        bad.add((chat_id, index, "mt_low"))

    candidates = []
    for chat in chats:
        for utterance in chat.utterances:
            for origin in ORIGINS:
                verdict = ERRONEOUS if (chat.chat_id, utterance.index, origin) in bad else CORRECT
                candidates.append(
                    TranslationCandidate(
                        chat_id=chat.chat_id,
                        index=utterance.index,
                        origin=origin,
                        lang=chat.tgt_lang,
                        text=_sentence(rng, chat.tgt_lang),
                        verdict=verdict,
                    )
                )
    return chats, candidates


def coherence_fixture(n_chats=1500, raters=10, seed=0):
    """Ratings for n_chats with a fixed vote pattern: chats below 250 receive
    7 + (i % 4) coherent votes, the rest i % 7, so exactly 250 clear the
    7-vote bar."""
    ratings = []
    reasons = list(INCOHERENCE_REASONS)
    for i in range(n_chats):
        chat_id = f"chat-{i:04d}"
        votes = 7 + (i % 4) if i < 250 else i % 7
        for r in range(raters):
            coherent = r < votes
            ratings.append(
                CoherenceRating(
                    chat_id=chat_id,
                    worker_id=f"w{r:03d}",
                    coherent=coherent,
                    reasons=[] if coherent else [reasons[(i + r) % len(reasons)]],
                )
            )
    return ratings


SENTINEL = "xqzt"


def sentinel_corpus(n=2000, seed=0):
    """Balanced labeled quads where every erroneous response translation
    contains the sentinel token and no correct one does."""
    rng = random.Random(seed)
    examples = []
    for i in range(n):
        direction = "en-ja" if i % 4 < 2 else "ja-en"
        src_lang, tgt_lang = direction.split("-")
        erroneous = i % 2 == 1
        resp_tgt = _sentence(rng, tgt_lang)
        if erroneous:
            pieces = resp_tgt.split() if " " in resp_tgt else list(resp_tgt)
            slot = rng.randint(0, len(pieces))
            pieces.insert(slot, f" {SENTINEL} ")
            resp_tgt = (" " if " " in resp_tgt else "").join(pieces)
        quad = ChatQuad(
            ctx_src=_sentence(rng, src_lang),
            ctx_tgt=_sentence(rng, tgt_lang),
            resp_src=_sentence(rng, src_lang),
            resp_tgt=resp_tgt,
            direction=direction,
            chat_id=f"syn-{i:05d}",
            index=1,
            origin="mt_low" if erroneous else "human",
        )
        examples.append(LabeledExample(quad=quad, label=ERRONEOUS if erroneous else CORRECT))
    return examples
