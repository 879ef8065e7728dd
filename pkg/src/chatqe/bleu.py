"""Sentence-level and corpus-level BLEU with pluggable tokenization and
smoothing. Scores are on the 0-100 scale.

Short hypotheses use the effective-order convention: n-gram orders the
hypothesis cannot populate are skipped, so any non-empty string scores 100
against itself.
"""

import math
import re
from collections import Counter
from dataclasses import dataclass

from .errors import ValidationError

_WORD_OR_PUNCT = re.compile(r"\w+|[^\w\s]", re.UNICODE)


def _tokenize_whitespace(text):
    return text.split()


def _tokenize_ws_punct(text):
    """Whitespace-plus-punctuation: words and punctuation marks as separate tokens."""
    return _WORD_OR_PUNCT.findall(text)


def _tokenize_char(text):
    return [ch for ch in text if not ch.isspace()]


TOKENIZERS = {
    "whitespace": _tokenize_whitespace,
    "ws-punct": _tokenize_ws_punct,
    "char": _tokenize_char,
}

SMOOTHING_METHODS = ("none", "add-k", "floor")


@dataclass(frozen=True)
class BleuConfig:
    tokenizer: str = "ws-punct"
    max_ngram: int = 4
    smoothing: str = "add-k"  # additive smoothing on orders > 1
    smooth_value: float = 1.0  # k for add-k, floor value for floor
    weights: tuple | None = None  # None = uniform over max_ngram orders

    def __post_init__(self):
        if self.tokenizer not in TOKENIZERS:
            raise ValidationError(f"unknown tokenizer {self.tokenizer!r}")
        if self.smoothing not in SMOOTHING_METHODS:
            raise ValidationError(f"unknown smoothing {self.smoothing!r}")
        if self.max_ngram < 1:
            raise ValidationError("max_ngram must be >= 1")
        if self.weights is not None and len(self.weights) != self.max_ngram:
            raise ValidationError("weights must have one entry per n-gram order")

    def to_dict(self):
        return {
            "tokenizer": self.tokenizer,
            "max_ngram": self.max_ngram,
            "smoothing": self.smoothing,
            "smooth_value": self.smooth_value,
            "weights": list(self.weights) if self.weights is not None else None,
        }


# Unsmoothed scoring under the standard tokenizer; the reference point for
# hand-checkable modified-precision arithmetic.
PLAIN_CONFIG = BleuConfig(smoothing="none")


def _ngram_counts(tokens, n):
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def _match_stats(hyp_tokens, ref_tokens, max_ngram):
    """Per-order (matched, total) clipped n-gram counts."""
    stats = []
    for n in range(1, max_ngram + 1):
        hyp_counts = _ngram_counts(hyp_tokens, n)
        total = sum(hyp_counts.values())
        if total == 0:
            stats.append((0, 0))
            continue
        ref_counts = _ngram_counts(ref_tokens, n)
        matched = sum(min(count, ref_counts[gram]) for gram, count in hyp_counts.items())
        stats.append((matched, total))
    return stats


def _score(stats, hyp_len, ref_len, cfg):
    precisions = []
    weights = []
    uniform = cfg.weights is None
    for order0, (matched, total) in enumerate(stats):
        if total == 0:
            continue  # effective order: the hypothesis has no n-grams here
        if cfg.smoothing == "add-k" and order0 > 0:
            p = (matched + cfg.smooth_value) / (total + cfg.smooth_value)
        elif cfg.smoothing == "floor" and matched == 0:
            p = cfg.smooth_value / total
        else:
            p = matched / total
        precisions.append(p)
        weights.append(1.0 if uniform else cfg.weights[order0])
    if not precisions or any(p == 0.0 for p in precisions):
        return 0.0
    weight_sum = sum(weights)
    log_mean = sum(w * math.log(p) for w, p in zip(weights, precisions)) / weight_sum
    if hyp_len >= ref_len:
        brevity = 1.0
    else:
        brevity = math.exp(1.0 - ref_len / hyp_len)
    return 100.0 * brevity * math.exp(log_mean)


def sentence_bleu(hypothesis, reference, cfg=BleuConfig()):
    """Single-pair BLEU with brevity penalty, in [0, 100]."""
    if not hypothesis.strip() or not reference.strip():
        raise ValidationError("sentence_bleu requires non-empty hypothesis and reference")
    tokenize = TOKENIZERS[cfg.tokenizer]
    hyp = tokenize(hypothesis)
    ref = tokenize(reference)
    stats = _match_stats(hyp, ref, cfg.max_ngram)
    return _score(stats, len(hyp), len(ref), cfg)


def corpus_bleu(hypotheses, references, cfg=BleuConfig()):
    """Corpus BLEU: n-gram statistics pooled over all pairs before scoring."""
    if len(hypotheses) != len(references):
        raise ValidationError("corpus_bleu needs aligned hypothesis/reference lists")
    if not hypotheses:
        raise ValidationError("corpus_bleu needs at least one pair")
    tokenize = TOKENIZERS[cfg.tokenizer]
    pooled = [(0, 0)] * cfg.max_ngram
    hyp_len = ref_len = 0
    for hypothesis, reference in zip(hypotheses, references):
        hyp = tokenize(hypothesis)
        ref = tokenize(reference)
        hyp_len += len(hyp)
        ref_len += len(ref)
        for i, (matched, total) in enumerate(_match_stats(hyp, ref, cfg.max_ngram)):
            pooled[i] = (pooled[i][0] + matched, pooled[i][1] + total)
    return _score(pooled, hyp_len, ref_len, cfg)
