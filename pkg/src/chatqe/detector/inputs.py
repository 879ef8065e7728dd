"""Classifier input assembly: [CLS] ctx_src [SEP] ctx_tgt [SEP] resp_src
[SEP] resp_tgt, with truncation that trims context from the left and never
touches the response translation.
"""

from dataclasses import dataclass

from ..errors import InputTooLongError, ValidationError

DEFAULT_MAX_LENGTH = 512
_SPECIALS = 4  # one [CLS] plus three [SEP]


@dataclass(frozen=True)
class DetectorInput:
    """Token ids for one quad, with the (start, end) range of each span."""

    token_ids: tuple
    attention_mask: tuple
    spans: tuple  # four (start, end) pairs: ctx_src, ctx_tgt, resp_src, resp_tgt
    max_length: int

    def __post_init__(self):
        if len(self.token_ids) != len(self.attention_mask):
            raise ValidationError("token_ids and attention_mask lengths differ")
        if len(self.spans) != 4:
            raise ValidationError("a detector input has exactly 4 spans")


def assemble_input(quad, tokenizer, max_length=DEFAULT_MAX_LENGTH):
    """Tokenize a quad into the fixed four-span layout.

    When the sequence exceeds max_length, tokens are removed from the left of
    ctx_src, then ctx_tgt, then resp_src; resp_tgt is never truncated — if it
    cannot fit on its own the input is rejected.
    """
    fields = (quad.ctx_src, quad.ctx_tgt, quad.resp_src, quad.resp_tgt)
    if any(not field.strip() for field in fields):
        raise ValidationError("quad fields must be non-empty")
    spans = [tokenizer.encode(field) for field in fields]
    if _SPECIALS + len(spans[3]) > max_length:
        raise InputTooLongError(
            f"response translation needs {_SPECIALS + len(spans[3])} tokens "
            f"but max_length is {max_length}"
        )
    overflow = _SPECIALS + sum(len(span) for span in spans) - max_length
    for i in (0, 1, 2):
        if overflow <= 0:
            break
        cut = min(overflow, len(spans[i]))
        spans[i] = spans[i][cut:]
        overflow -= cut
    token_ids = [tokenizer.cls_id]
    ranges = []
    for position, span in enumerate(spans):
        start = len(token_ids)
        token_ids.extend(span)
        ranges.append((start, len(token_ids)))
        if position < 3:
            token_ids.append(tokenizer.sep_id)
    return DetectorInput(
        token_ids=tuple(token_ids),
        attention_mask=(1,) * len(token_ids),
        spans=tuple(ranges),
        max_length=max_length,
    )


def collate_batch(inputs, pad_id):
    """Pad a batch to its longest sequence; returns (id rows, mask rows)."""
    if not inputs:
        raise ValidationError("cannot collate an empty batch")
    width = max(len(item.token_ids) for item in inputs)
    ids = []
    masks = []
    for item in inputs:
        padding = width - len(item.token_ids)
        ids.append(list(item.token_ids) + [pad_id] * padding)
        masks.append(list(item.attention_mask) + [0] * padding)
    return ids, masks
