"""
Building a labeled bilingual chat-translation corpus
====================================================

A walkthrough of the data pipeline: start from raw bilingual chats, screen
them for coherence, produce translation candidates at three quality tiers,
aggregate simulated crowd verdicts, drop utterances with no trustworthy
translation, and assemble the four-field classifier examples.
"""

import random

from chatqe.backends import DegradingMockBackend, generate_candidates
from chatqe.coherence import CoherenceRating, score_chats, select_top
from chatqe.corpus import Chat, Utterance, build_quads
from chatqe.labeling import (
    TranslationRating,
    aggregate_verdicts,
    compute_stats,
    label_candidates,
)

# ---------------------------------------------------------------------------
# Two short English chats, with hand-written Japanese reference translations
# keyed by (chat_id, utterance index). The reference is what a professional
# translator would produce; the machine tiers will degrade it.
# ---------------------------------------------------------------------------

SCRIPTS = {
    "picnic": [
        ("Do you want to have a picnic tomorrow?", "明日ピクニックに行きませんか？"),
        ("Sounds great, what should I bring?", "いいですね、何を持っていけばいいですか？"),
        ("Just bring something to drink.", "飲み物だけ持ってきてください。"),
        ("Perfect, see you at noon.", "了解です、正午に会いましょう。"),
    ],
    "cooking": [
        ("I tried cooking curry last night.", "昨夜カレーを作ってみました。"),
        ("How did it turn out?", "出来はどうでしたか？"),
        ("A little too spicy, but edible.", "少し辛すぎましたが、食べられました。"),
        ("Next time use less pepper!", "次は唐辛子を減らしてね！"),
    ],
}

chats = []
references = {}
for chat_id, lines in SCRIPTS.items():
    utterances = []
    for index, (english, japanese) in enumerate(lines):
        utterances.append(Utterance(chat_id=chat_id, index=index,
                                    speaker="p1" if index % 2 == 0 else "p2",
                                    text=english))
        references[(chat_id, index)] = japanese
    chats.append(Chat(chat_id=chat_id, source_corpus="demo", src_lang="en",
                      tgt_lang="ja", personas=[["likes picnics"], ["likes cooking"]],
                      utterances=utterances))

print(f"built {len(chats)} chats, {sum(len(c.utterances) for c in chats)} utterances")

# ---------------------------------------------------------------------------
# Coherence screening. Ten simulated raters vote on every chat; only chats
# with at least 7 coherent votes survive. Here both are fine conversations,
# but we show the machinery, including a chat that fails the bar.
# ---------------------------------------------------------------------------

ratings = []
for chat in chats:
    for worker in range(10):
        ratings.append(CoherenceRating(chat.chat_id, f"w{worker}", True, []))
# a third chat that raters found hard to follow
for worker in range(10):
    ratings.append(CoherenceRating("rambling", f"w{worker}", worker < 3,
                                   [] if worker < 3 else ["hard_to_follow"]))

scores = score_chats(ratings)
selected = select_top(scores, k=2, min_votes=7)
print("coherence votes:", {s.chat_id: s.coherent_votes for s in scores})
print("selected chats:", selected)
chats = [chat for chat in chats if chat.chat_id in set(selected)]

# ---------------------------------------------------------------------------
# Translation candidates at three quality tiers. The deterministic mock
# backend degrades the reference translation with seeded word dropout and
# adjacent swaps; the "human" tier passes the reference through untouched.
# ---------------------------------------------------------------------------

tiers = [
    DegradingMockBackend("pro", "en", "ja", quality_tag="human",
                         references=references),
    DegradingMockBackend("nmt-b", "en", "ja", quality_tag="mt_high", seed=7,
                         swap_prob=0.25, references=references),
    DegradingMockBackend("nmt-a", "en", "ja", quality_tag="mt_low", seed=13,
                         drop_prob=0.35, swap_prob=0.5, references=references),
]
candidates = generate_candidates(chats, tiers)
print(f"\n{len(candidates)} candidates "
      f"({len(chats)} chats x {len(SCRIPTS['picnic'])} utterances x 3 tiers)")
for candidate in candidates[:3]:
    print(f"  {candidate.origin:>7}: {candidate.text}")

# ---------------------------------------------------------------------------
# Crowd labeling, simulated honestly: a worker marks a candidate bad when it
# deviates from the reference, with a little per-worker noise. Three workers
# rate every candidate and a majority vote decides (ties count as bad).
# ---------------------------------------------------------------------------

rng = random.Random(0)
translation_ratings = []
for candidate in candidates:
    reference = references[(candidate.chat_id, candidate.index)]
    for worker in range(3):
        honest_bad = candidate.text != reference
        flip = rng.random() < 0.05
        bad = honest_bad != flip
        translation_ratings.append(TranslationRating(
            chat_id=candidate.chat_id, index=candidate.index,
            origin=candidate.origin, worker_id=f"w{worker}",
            verdict="bad" if bad else "good",
            reasons=["incorrect"] if bad else [],
        ))

verdicts = aggregate_verdicts(translation_ratings, rule="majority")
labeled = label_candidates(candidates, verdicts)
bad_by_origin = {}
for candidate in labeled:
    if candidate.verdict == "erroneous":
        bad_by_origin[candidate.origin] = bad_by_origin.get(candidate.origin, 0) + 1
print("\nerroneous candidates by origin:", bad_by_origin)

# ---------------------------------------------------------------------------
# Dataset assembly. Utterances whose three candidates are all erroneous are
# deleted (no trustworthy context), then every remaining utterance after the
# first becomes three examples: (context, context translation, response,
# response translation) with the response translation under judgment.
# ---------------------------------------------------------------------------

stats = compute_stats(labeled, chats)
print(f"\ndeleted utterances: {stats.deleted_total}")
for direction, direction_stats in stats.directions.items():
    print(f"  {direction}: {direction_stats.example_count} examples, "
          f"{direction_stats.erroneous_count} erroneous")

examples = build_quads(chats, labeled, ctx_policy="best-correct")
print(f"\nfirst example of {len(examples)}:")
quad = examples[0].quad
print(f"  context src : {quad.ctx_src}")
print(f"  context tgt : {quad.ctx_tgt}")
print(f"  response src: {quad.resp_src}")
print(f"  response tgt: {quad.resp_tgt}")
print(f"  label       : {examples[0].label}")
