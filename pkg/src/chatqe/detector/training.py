"""Detector fine-tuning: Adam with inverse square-root learning-rate decay,
seeded shuffling, and negative-sample generation from a low-quality backend.
"""

import hashlib
import json
import random
from dataclasses import asdict, dataclass

import torch
from torch import nn
from torch.nn import functional as F

from ..corpus import CORRECT, ERRONEOUS, ChatQuad, LabeledExample
from ..errors import ModelError, ValidationError
from .inputs import DEFAULT_MAX_LENGTH, assemble_input, collate_batch
from .model import LABEL_MAP, DetectorModel, build_encoder, build_tokenizer
from .types import DEFAULT_THRESHOLD


@dataclass(frozen=True)
class DetectorConfig:
    """Training hyperparameters; defaults follow the published recipe."""

    encoder_id: str = "fresh:tiny"
    max_length: int = DEFAULT_MAX_LENGTH
    threshold: float = DEFAULT_THRESHOLD
    seed: int = 0
    beta1: float = 0.9
    beta2: float = 0.98
    epsilon: float = 1e-8
    weight_decay: float = 0.01
    max_lr: float = 0.001
    warmup_steps: int = 100
    batch_size: int = 16
    epochs: int = 1

    def __post_init__(self):
        if self.batch_size < 1 or self.max_length < 8 or self.warmup_steps < 1:
            raise ValidationError("batch_size, max_length, and warmup_steps must be positive")
        if self.max_lr <= 0 or self.epsilon <= 0:
            raise ValidationError("max_lr and epsilon must be positive")
        if self.epochs < 0:
            raise ValidationError("epochs must be >= 0")
        if not 0 < self.beta1 < 1 or not 0 < self.beta2 < 1:
            raise ValidationError("betas must be in (0, 1)")


def inverse_sqrt_lr(step, max_lr, warmup_steps):
    """Linear warmup to max_lr, then decay proportional to 1/sqrt(step)."""
    if step < 1:
        raise ValidationError("step counts from 1")
    return max_lr * min(step / warmup_steps, (warmup_steps / step) ** 0.5)


def dataset_digest(examples):
    """Stable content hash of a labeled example list, for the training manifest."""
    hasher = hashlib.sha256()
    for example in examples:
        quad = example.quad
        record = {
            "ctx_src": quad.ctx_src,
            "ctx_tgt": quad.ctx_tgt,
            "resp_src": quad.resp_src,
            "resp_tgt": quad.resp_tgt,
            "direction": quad.direction,
            "chat_id": quad.chat_id,
            "index": quad.index,
            "origin": quad.origin,
            "label": example.label,
        }
        hasher.update(json.dumps(record, sort_keys=True, ensure_ascii=False).encode("utf-8"))
        hasher.update(b"\n")
    return hasher.hexdigest()


def train(examples, config=DetectorConfig(), tokenizer=None):
    """Fine-tune an encoder + linear head on labeled quads.

    Examples are consumed in seeded shuffled order for exactly config.epochs
    epochs; loss is two-class cross-entropy. Both labels must be present.
    """
    if not examples:
        raise ModelError("training set is empty")
    labels = {example.label for example in examples}
    if labels != {CORRECT, ERRONEOUS}:
        raise ModelError(f"training set contains a single class {sorted(labels)}; need both labels")
    if tokenizer is None:
        texts = []
        for example in examples:
            quad = example.quad
            texts.extend((quad.ctx_src, quad.ctx_tgt, quad.resp_src, quad.resp_tgt))
        tokenizer = build_tokenizer(config.encoder_id, texts)
    encoder = build_encoder(config.encoder_id, tokenizer.vocab_size, config.max_length, config.seed)
    torch.manual_seed(config.seed + 1)
    head = nn.Linear(encoder.config.hidden_size, 2)
    optimizer = torch.optim.Adam(
        list(encoder.parameters()) + list(head.parameters()),
        lr=config.max_lr,
        betas=(config.beta1, config.beta2),
        eps=config.epsilon,
        weight_decay=config.weight_decay,
    )
    rng = random.Random(config.seed)
    encoder.train()
    head.train()
    step = 0
    for _ in range(config.epochs):
        order = list(range(len(examples)))
        rng.shuffle(order)
        for start in range(0, len(order), config.batch_size):
            batch = [examples[i] for i in order[start : start + config.batch_size]]
            step += 1
            lr = inverse_sqrt_lr(step, config.max_lr, config.warmup_steps)
            for group in optimizer.param_groups:
                group["lr"] = lr
            inputs = [
                assemble_input(example.quad, tokenizer, config.max_length) for example in batch
            ]
            ids, masks = collate_batch(inputs, tokenizer.pad_id)
            targets = torch.tensor([LABEL_MAP[example.label] for example in batch])
            output = encoder(
                input_ids=torch.tensor(ids, dtype=torch.long),
                attention_mask=torch.tensor(masks, dtype=torch.long),
            )
            logits = head(output.last_hidden_state[:, 0])
            loss = F.cross_entropy(logits, targets)
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
    manifest = {
        "dataset_sha256": dataset_digest(examples),
        "example_count": len(examples),
        "steps": step,
        "config": asdict(config),
    }
    return DetectorModel(
        encoder=encoder,
        head=head,
        tokenizer=tokenizer,
        encoder_id=config.encoder_id,
        max_length=config.max_length,
        threshold=config.threshold,
        seed=config.seed,
        manifest=manifest,
    )


def generate_training_set(pairs, low_backend, chat_id="parallel"):
    """Positive + negative labeled quads from an ordered parallel corpus.

    Consecutive pairs form (context, response): the positive keeps the
    reference translation, the negative replaces it with the low-quality
    backend's output.
    """
    if len(pairs) < 2:
        raise ValidationError("need at least two aligned pairs to form a context window")
    direction = f"{low_backend.source_lang}-{low_backend.target_lang}"
    examples = []
    for index in range(1, len(pairs)):
        ctx_src, ctx_tgt = pairs[index - 1]
        resp_src, resp_ref = pairs[index]
        positive = ChatQuad(
            ctx_src=ctx_src,
            ctx_tgt=ctx_tgt,
            resp_src=resp_src,
            resp_tgt=resp_ref,
            direction=direction,
            chat_id=chat_id,
            index=index,
            origin="human",
        )
        degraded = low_backend.translate_for(chat_id, index, resp_src)
        negative = ChatQuad(
            ctx_src=ctx_src,
            ctx_tgt=ctx_tgt,
            resp_src=resp_src,
            resp_tgt=degraded,
            direction=direction,
            chat_id=chat_id,
            index=index,
            origin=low_backend.quality_tag,
        )
        examples.append(LabeledExample(quad=positive, label=CORRECT))
        examples.append(LabeledExample(quad=negative, label=ERRONEOUS))
    return examples
