"""Detector model: a multilingual masked-LM encoder with a two-class linear
head over the first position's representation. Supports seeded fresh
encoders for desk-scale work and pretrained checkpoints by name.
"""

import json
from pathlib import Path

import torch
from torch import nn
from transformers import BertConfig, BertModel

from ..corpus import CORRECT, ERRONEOUS
from ..errors import ModelError, ValidationError
from .inputs import assemble_input, collate_batch
from .tokenizer import WordVocabTokenizer
from .types import DEFAULT_THRESHOLD, prediction_from_prob

LABEL_MAP = {CORRECT: 0, ERRONEOUS: 1}

ENCODER_PROFILES = {
    "fresh:tiny": dict(hidden_size=64, num_hidden_layers=2, num_attention_heads=2, intermediate_size=128),
    "fresh:small": dict(hidden_size=128, num_hidden_layers=4, num_attention_heads=4, intermediate_size=256),
}


class PretrainedTokenizer:
    """Adapter giving a hub tokenizer the interface the input assembler needs."""

    def __init__(self, hf_tokenizer):
        self.hf = hf_tokenizer

    def encode(self, text):
        return self.hf.encode(text, add_special_tokens=False)

    @property
    def cls_id(self):
        return self.hf.cls_token_id

    @property
    def sep_id(self):
        return self.hf.sep_token_id

    @property
    def pad_id(self):
        return self.hf.pad_token_id

    @property
    def vocab_size(self):
        return len(self.hf)


def build_encoder(encoder_id, vocab_size, max_length, seed):
    """A seeded randomly-initialized encoder for fresh:* ids, else a checkpoint."""
    if encoder_id in ENCODER_PROFILES:
        torch.manual_seed(seed)
        config = BertConfig(
            vocab_size=vocab_size,
            max_position_embeddings=max_length + 2,
            **ENCODER_PROFILES[encoder_id],
        )
        return BertModel(config)
    if encoder_id.startswith("fresh:"):
        raise ValidationError(f"unknown fresh encoder profile {encoder_id!r}")
    from transformers import AutoModel

    return AutoModel.from_pretrained(encoder_id)


def build_tokenizer(encoder_id, texts):
    if encoder_id in ENCODER_PROFILES:
        return WordVocabTokenizer.from_texts(texts)
    from transformers import AutoTokenizer

    return PretrainedTokenizer(AutoTokenizer.from_pretrained(encoder_id))


class DetectorModel:
    """A trained (or freshly initialized) detector ready for prediction.

    Loaded models are immutable from the caller's perspective; predict and
    predict_batch do not mutate state and are safe to call concurrently.
    """

    def __init__(
        self,
        encoder,
        head,
        tokenizer,
        encoder_id,
        max_length,
        threshold=DEFAULT_THRESHOLD,
        seed=0,
        manifest=None,
    ):
        self.encoder = encoder
        self.head = head
        self.tokenizer = tokenizer
        self.encoder_id = encoder_id
        self.max_length = max_length
        self.threshold = threshold
        self.seed = seed
        self.manifest = manifest or {}
        self.encoder.eval()
        self.head.eval()

    def logits(self, quads):
        inputs = [assemble_input(quad, self.tokenizer, self.max_length) for quad in quads]
        ids, masks = collate_batch(inputs, self.tokenizer.pad_id)
        output = self.encoder(
            input_ids=torch.tensor(ids, dtype=torch.long),
            attention_mask=torch.tensor(masks, dtype=torch.long),
        )
        return self.head(output.last_hidden_state[:, 0])

    def predict(self, quad):
        return self.predict_batch([quad])[0]

    def predict_batch(self, quads, batch_size=16):
        predictions = []
        with torch.no_grad():
            for start in range(0, len(quads), batch_size):
                chunk = quads[start : start + batch_size]
                probs = torch.softmax(self.logits(chunk), dim=-1)
                for prob in probs[:, LABEL_MAP[ERRONEOUS]].tolist():
                    prob = min(max(prob, 0.0), 1.0)
                    predictions.append(prediction_from_prob(prob, self.threshold))
        return predictions

    def save(self, directory):
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        config = {
            "encoder_id": self.encoder_id,
            "max_length": self.max_length,
            "threshold": self.threshold,
            "seed": self.seed,
            "label_map": dict(LABEL_MAP),
        }
        (directory / "config.json").write_text(json.dumps(config, indent=2), encoding="utf-8")
        (directory / "encoder_config.json").write_text(
            self.encoder.config.to_json_string(), encoding="utf-8"
        )
        torch.save(self.encoder.state_dict(), directory / "encoder.pt")
        torch.save(self.head.state_dict(), directory / "head.pt")
        if isinstance(self.tokenizer, WordVocabTokenizer):
            self.tokenizer.save(directory / "tokenizer.json")
        else:
            payload = {"type": "pretrained", "encoder_id": self.encoder_id}
            (directory / "tokenizer.json").write_text(json.dumps(payload), encoding="utf-8")
        (directory / "manifest.json").write_text(
            json.dumps(self.manifest, indent=2), encoding="utf-8"
        )


def load_model(directory):
    """Load a saved artifact; inconsistent pieces raise ModelError."""
    directory = Path(directory)
    try:
        config = json.loads((directory / "config.json").read_text(encoding="utf-8"))
        tokenizer_payload = json.loads((directory / "tokenizer.json").read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise ModelError(f"not a model artifact directory: {directory} ({exc})") from exc
    encoder_id = config["encoder_id"]
    if tokenizer_payload.get("type") == "word-vocab":
        tokenizer = WordVocabTokenizer(tokenizer_payload["tokens"])
    else:
        from transformers import AutoTokenizer

        tokenizer = PretrainedTokenizer(AutoTokenizer.from_pretrained(encoder_id))
    encoder_config = BertConfig.from_dict(
        json.loads((directory / "encoder_config.json").read_text(encoding="utf-8"))
    )
    if tokenizer.vocab_size != encoder_config.vocab_size:
        raise ModelError(
            f"tokenizer vocabulary ({tokenizer.vocab_size}) does not match encoder "
            f"embeddings ({encoder_config.vocab_size})"
        )
    encoder = BertModel(encoder_config)
    head = nn.Linear(encoder_config.hidden_size, 2)
    try:
        encoder.load_state_dict(torch.load(directory / "encoder.pt", weights_only=True))
        head.load_state_dict(torch.load(directory / "head.pt", weights_only=True))
    except (RuntimeError, FileNotFoundError) as exc:
        raise ModelError(f"failed to load model weights from {directory}: {exc}") from exc
    manifest_path = directory / "manifest.json"
    manifest = json.loads(manifest_path.read_text(encoding="utf-8")) if manifest_path.exists() else {}
    return DetectorModel(
        encoder=encoder,
        head=head,
        tokenizer=tokenizer,
        encoder_id=encoder_id,
        max_length=config["max_length"],
        threshold=config["threshold"],
        seed=config["seed"],
        manifest=manifest,
    )
