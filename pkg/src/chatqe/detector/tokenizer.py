"""Word-level tokenizer with a fixed vocabulary and the three special tokens
the detector input layout needs ([PAD], [CLS], [SEP], plus [UNK] for
out-of-vocabulary words). CJK runs are split into single characters so
unspaced text still yields a useful vocabulary.
"""

import json
import re
from pathlib import Path

from ..errors import ValidationError

PAD, CLS, SEP, UNK = "[PAD]", "[CLS]", "[SEP]", "[UNK]"
SPECIAL_TOKENS = (PAD, CLS, SEP, UNK)

_WORD_OR_PUNCT = re.compile(r"\w+|[^\w\s]", re.UNICODE)


def _is_cjk(char):
    code = ord(char)
    return 0x3000 <= code <= 0x9FFF or 0xF900 <= code <= 0xFAFF or 0xFF00 <= code <= 0xFFEF


def word_tokens(text):
    """Split into words and punctuation; CJK word runs become single characters."""
    tokens = []
    for piece in _WORD_OR_PUNCT.findall(text):
        if any(_is_cjk(char) for char in piece):
            tokens.extend(piece)
        else:
            tokens.append(piece)
    return tokens


class WordVocabTokenizer:
    """Maps text to token ids over a frozen word vocabulary."""

    def __init__(self, tokens):
        if list(tokens[: len(SPECIAL_TOKENS)]) != list(SPECIAL_TOKENS):
            raise ValidationError("vocabulary must start with the special tokens")
        if len(set(tokens)) != len(tokens):
            raise ValidationError("vocabulary contains duplicate tokens")
        self.tokens = list(tokens)
        self.ids = {token: i for i, token in enumerate(self.tokens)}

    @classmethod
    def from_texts(cls, texts):
        vocabulary = sorted({token for text in texts for token in word_tokens(text)})
        return cls(list(SPECIAL_TOKENS) + vocabulary)

    @property
    def pad_id(self):
        return self.ids[PAD]

    @property
    def cls_id(self):
        return self.ids[CLS]

    @property
    def sep_id(self):
        return self.ids[SEP]

    @property
    def vocab_size(self):
        return len(self.tokens)

    def encode(self, text):
        unk = self.ids[UNK]
        return [self.ids.get(token, unk) for token in word_tokens(text)]

    def save(self, path):
        payload = {"type": "word-vocab", "tokens": self.tokens}
        Path(path).write_text(json.dumps(payload, ensure_ascii=False), encoding="utf-8")

    @classmethod
    def load(cls, path):
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
        if payload.get("type") != "word-vocab":
            raise ValidationError(f"{path}: not a word-vocab tokenizer file")
        return cls(payload["tokens"])
