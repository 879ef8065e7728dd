"""Crowd quality ratings of translations: verdict aggregation, the
all-erroneous deletion rule, and dataset statistics.
"""

from dataclasses import dataclass, field

from .corpus import CORRECT, ERRONEOUS, ORIGINS
from .errors import ValidationError
from .jsonl import read_records, write_records

BAD_REASONS = (
    "incorrect",
    "content_lost",
    "grammar_spelling",
    "style_shift",
    "incomprehensible",
    "generally_terrible",
)

GOOD = "good"
BAD = "bad"


@dataclass
class TranslationRating:
    chat_id: str
    index: int
    origin: str
    worker_id: str
    verdict: str
    reasons: list = field(default_factory=list)

    @property
    def key(self):
        return (self.chat_id, self.index, self.origin, self.worker_id)


def validate_translation_rating(rating):
    if rating.verdict not in (GOOD, BAD):
        raise ValidationError(f"rating {rating.key}: unknown verdict {rating.verdict!r}")
    if rating.origin not in ORIGINS:
        raise ValidationError(f"rating {rating.key}: unknown origin {rating.origin!r}")
    if rating.verdict == GOOD and rating.reasons:
        raise ValidationError(f"rating {rating.key}: reasons given for a good verdict")
    for reason in rating.reasons:
        if reason not in BAD_REASONS:
            raise ValidationError(f"rating {rating.key}: unknown reason {reason!r}")
    return rating


def read_translation_ratings(path):
    out = []
    for line_no, rec in read_records(path):
        try:
            rating = TranslationRating(
                chat_id=rec["chat_id"],
                index=rec["index"],
                origin=rec["origin"],
                worker_id=rec["worker_id"],
                verdict=rec["verdict"],
                reasons=rec.get("reasons", []),
            )
        except KeyError as exc:
            raise ValidationError(f"{path}:{line_no}: missing field {exc}") from exc
        out.append(validate_translation_rating(rating))
    return out


def write_translation_ratings(ratings, path):
    def records():
        for r in ratings:
            validate_translation_rating(r)
            rec = {
                "chat_id": r.chat_id,
                "index": r.index,
                "origin": r.origin,
                "worker_id": r.worker_id,
                "verdict": r.verdict,
            }
            if r.reasons:
                rec["reasons"] = r.reasons
            yield rec

    write_records(path, records())


def _majority(bad, total):
    # ties count as erroneous: a missed error costs more than a false alarm
    return ERRONEOUS if 2 * bad >= total else CORRECT


def _any_bad(bad, total):
    return ERRONEOUS if bad > 0 else CORRECT


def _all_bad(bad, total):
    return ERRONEOUS if bad == total else CORRECT


AGGREGATION_RULES = {
    "majority": _majority,
    "any-bad": _any_bad,
    "all-bad": _all_bad,
}


def aggregate_verdicts(ratings, rule="majority"):
    """Collapse per-worker ratings into one verdict per (chat_id, index, origin).

    The default rule labels a translation erroneous when at least half of its
    raters called it bad.
    """
    if isinstance(rule, str):
        try:
            decide = AGGREGATION_RULES[rule]
        except KeyError:
            raise ValidationError(
                f"unknown aggregation rule {rule!r}; choose from {sorted(AGGREGATION_RULES)}"
            ) from None
    else:
        decide = rule

    seen = set()
    counts = {}
    for rating in ratings:
        validate_translation_rating(rating)
        if rating.key in seen:
            raise ValidationError(f"duplicate rating {rating.key}")
        seen.add(rating.key)
        key = (rating.chat_id, rating.index, rating.origin)
        bad, total = counts.get(key, (0, 0))
        counts[key] = (bad + (1 if rating.verdict == BAD else 0), total + 1)
    return {key: decide(bad, total) for key, (bad, total) in counts.items()}


def label_candidates(candidates, verdicts):
    """Attach aggregated verdicts to candidates; every candidate must be rated."""
    labeled = []
    for cand in candidates:
        verdict = verdicts.get(cand.key)
        if verdict is None:
            raise ValidationError(f"candidate {cand.key} has no aggregated verdict")
        labeled.append(
            type(cand)(
                chat_id=cand.chat_id,
                index=cand.index,
                origin=cand.origin,
                lang=cand.lang,
                text=cand.text,
                verdict=verdict,
            )
        )
    return labeled


def apply_deletion_rule(candidates):
    """Split verdicted candidates into (retained, deleted utterances).

    An utterance is deleted iff every one of its candidates is erroneous; all
    candidates of a deleted utterance are removed. Returns the retained
    candidate list (input order) and the sorted list of deleted
    (chat_id, index) pairs.
    """
    by_utterance = {}
    for cand in candidates:
        if cand.verdict is None:
            raise ValidationError(f"candidate {cand.key} carries no verdict")
        by_utterance.setdefault((cand.chat_id, cand.index), []).append(cand)

    deleted = sorted(
        utt
        for utt, cands in by_utterance.items()
        if all(c.verdict == ERRONEOUS for c in cands)
    )
    deleted_set = set(deleted)
    retained = [c for c in candidates if (c.chat_id, c.index) not in deleted_set]
    return retained, deleted


@dataclass
class DirectionStats:
    utterance_count: int = 0  # retained response utterances (index >= 1)
    example_count: int = 0
    erroneous_count: int = 0
    correct_count: int = 0
    deleted_count: int = 0


@dataclass
class DatasetStats:
    directions: dict = field(default_factory=dict)  # direction -> DirectionStats
    origin_bad_rates: dict = field(default_factory=dict)  # origin -> fraction in [0,1]
    origin_bad_counts: dict = field(default_factory=dict)
    origin_totals: dict = field(default_factory=dict)
    deleted_total: int = 0

    def to_dict(self):
        return {
            "directions": {
                d: {
                    "utterance_count": s.utterance_count,
                    "example_count": s.example_count,
                    "erroneous_count": s.erroneous_count,
                    "correct_count": s.correct_count,
                    "deleted_count": s.deleted_count,
                }
                for d, s in sorted(self.directions.items())
            },
            "origin_bad_rates": {o: self.origin_bad_rates[o] for o in ORIGINS if o in self.origin_bad_rates},
            "origin_bad_counts": {o: self.origin_bad_counts[o] for o in ORIGINS if o in self.origin_bad_counts},
            "origin_totals": {o: self.origin_totals[o] for o in ORIGINS if o in self.origin_totals},
            "deleted_total": self.deleted_total,
        }


def compute_stats(candidates, chats):
    """Dataset statistics over a fully labeled candidate set.

    Per-origin bad rates cover the whole corpus (before deletion); the
    per-direction counts describe what the deletion rule and quad builder
    retain.
    """
    direction_by_chat = {c.chat_id: c.direction for c in chats}
    stats = DatasetStats()

    for cand in candidates:
        if cand.verdict is None:
            raise ValidationError(f"candidate {cand.key} carries no verdict")
        stats.origin_totals[cand.origin] = stats.origin_totals.get(cand.origin, 0) + 1
        if cand.verdict == ERRONEOUS:
            stats.origin_bad_counts[cand.origin] = stats.origin_bad_counts.get(cand.origin, 0) + 1
    for origin, total in stats.origin_totals.items():
        bad = stats.origin_bad_counts.get(origin, 0)
        stats.origin_bad_counts.setdefault(origin, 0)
        stats.origin_bad_rates[origin] = bad / total if total else 0.0

    retained, deleted = apply_deletion_rule(candidates)

    for chat_id, index in deleted:
        direction = direction_by_chat.get(chat_id)
        if direction is None:
            raise ValidationError(f"candidate references unknown chat {chat_id!r}")
        per_dir = stats.directions.setdefault(direction, DirectionStats())
        per_dir.deleted_count += 1
        stats.deleted_total += 1

    counted_utterances = set()
    for cand in retained:
        if cand.index == 0:
            continue  # context-only, never becomes an example
        direction = direction_by_chat.get(cand.chat_id)
        if direction is None:
            raise ValidationError(f"candidate references unknown chat {cand.chat_id!r}")
        per_dir = stats.directions.setdefault(direction, DirectionStats())
        per_dir.example_count += 1
        if cand.verdict == ERRONEOUS:
            per_dir.erroneous_count += 1
        else:
            per_dir.correct_count += 1
        if (cand.chat_id, cand.index) not in counted_utterances:
            counted_utterances.add((cand.chat_id, cand.index))
            per_dir.utterance_count += 1

    return stats
