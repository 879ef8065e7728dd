"""Crowd coherence ratings: aggregation into per-chat vote counts and
selection of the top-K coherent chats.
"""

import logging
from dataclasses import dataclass, field

from .errors import ValidationError
from .jsonl import read_records, write_records

logger = logging.getLogger(__name__)

INCOHERENCE_REASONS = (
    "question_ignored",
    "unnatural_topic_change",
    "not_addressing",
    "out_of_order",
    "hard_to_follow",
)

# paper defaults: 10 raters per chat, keep chats with >= 7 coherent votes
DEFAULT_MIN_VOTES = 7
DEFAULT_RATERS = 10


@dataclass
class CoherenceRating:
    chat_id: str
    worker_id: str
    coherent: bool
    reasons: list = field(default_factory=list)


@dataclass
class ChatScore:
    chat_id: str
    coherent_votes: int
    total_votes: int


def validate_rating(rating):
    if rating.coherent and rating.reasons:
        raise ValidationError(
            f"rating ({rating.chat_id}, {rating.worker_id}): reasons given for a coherent verdict"
        )
    if not rating.coherent and not rating.reasons:
        raise ValidationError(
            f"rating ({rating.chat_id}, {rating.worker_id}): incoherent verdict needs reasons"
        )
    for reason in rating.reasons:
        if reason not in INCOHERENCE_REASONS:
            raise ValidationError(
                f"rating ({rating.chat_id}, {rating.worker_id}): unknown reason {reason!r}"
            )
    return rating


def read_coherence_ratings(path):
    out = []
    for line_no, rec in read_records(path):
        try:
            rating = CoherenceRating(
                chat_id=rec["chat_id"],
                worker_id=rec["worker_id"],
                coherent=rec["coherent"],
                reasons=rec.get("reasons", []),
            )
        except KeyError as exc:
            raise ValidationError(f"{path}:{line_no}: missing field {exc}") from exc
        out.append(validate_rating(rating))
    return out


def write_coherence_ratings(ratings, path):
    def records():
        for r in ratings:
            validate_rating(r)
            rec = {"chat_id": r.chat_id, "worker_id": r.worker_id, "coherent": r.coherent}
            if not r.coherent:
                rec["reasons"] = r.reasons
            yield rec

    write_records(path, records())


def score_chats(ratings):
    """One ChatScore per distinct chat_id, sorted by chat_id.

    Duplicate (chat_id, worker_id) pairs are a validation error.
    """
    seen = set()
    votes = {}
    for rating in ratings:
        key = (rating.chat_id, rating.worker_id)
        if key in seen:
            raise ValidationError(f"duplicate rating for {key}")
        seen.add(key)
        coherent, total = votes.get(rating.chat_id, (0, 0))
        votes[rating.chat_id] = (coherent + (1 if rating.coherent else 0), total + 1)
    return [
        ChatScore(chat_id=cid, coherent_votes=c, total_votes=t)
        for cid, (c, t) in sorted(votes.items())
    ]


def select_top(scores, k, min_votes=DEFAULT_MIN_VOTES):
    """Up to k chat_ids by coherent_votes descending, ties broken by ascending
    chat_id. Every returned chat has coherent_votes >= min_votes; a shortfall
    is logged, not raised.
    """
    if k < 0:
        raise ValidationError("k must be >= 0")
    qualified = [s for s in scores if s.coherent_votes >= min_votes]
    qualified.sort(key=lambda s: (-s.coherent_votes, s.chat_id))
    selected = [s.chat_id for s in qualified[:k]]
    if len(selected) < k:
        logger.warning(
            "coherence selection shortfall: wanted %d chats, only %d have >= %d votes",
            k,
            len(selected),
            min_votes,
        )
    return selected
