"""
Training the erroneous-translation detector
===========================================

The detector reads a four-field example — context, context translation,
response, response translation — through a single encoder with separator
tokens, and classifies the response translation as correct or erroneous.

The full-scale recipe fine-tunes a pretrained multilingual encoder, which
needs hours of accelerator time. This walkthrough uses a small from-scratch
encoder on a synthetic task that is fully learnable in seconds: erroneous
response translations contain a sentinel token, correct ones never do.
"""

import tempfile
from pathlib import Path

from chatqe.corpus import ChatQuad
from chatqe.detector.baselines import majority_classifier
from chatqe.detector.model import load_model
from chatqe.detector.training import DetectorConfig, train
from chatqe.evaluation import accuracy, confusion
from chatqe.synthetic import SENTINEL, sentinel_corpus

# ---------------------------------------------------------------------------
# A balanced corpus of 2,000 labeled examples; the first 1,600 train the
# model and the final 400 are held out untouched.
# ---------------------------------------------------------------------------

examples = sentinel_corpus(n=2000, seed=0)
train_set, held_out = examples[:1600], examples[1600:]
print(f"{len(train_set)} training examples, {len(held_out)} held out")
erroneous = next(e for e in train_set if e.label == "erroneous")
print(f"an erroneous response translation: {erroneous.quad.resp_tgt!r}")
print(f"(the sentinel token is {SENTINEL!r})")

# ---------------------------------------------------------------------------
# Train. The configuration mirrors the published optimizer recipe (Adam with
# beta2=0.98, inverse square-root decay after linear warmup) but swaps in a
# tiny fresh encoder and a short schedule. Everything is seeded.
# ---------------------------------------------------------------------------

config = DetectorConfig(encoder_id="fresh:tiny", batch_size=16, max_length=64,
                        epochs=2, warmup_steps=50, seed=5)
model = train(train_set, config)
print(f"\ntrained for {model.manifest['steps']} steps "
      f"on {model.manifest['example_count']} examples "
      f"(dataset digest {model.manifest['dataset_sha256'][:12]}...)")

# ---------------------------------------------------------------------------
# Evaluate on the held-out split and compare with the majority baseline.
# ---------------------------------------------------------------------------

labels = [example.label for example in held_out]
predictions = model.predict_batch([example.quad for example in held_out])
held_out_accuracy = accuracy(confusion(predictions, labels))

baseline = majority_classifier(train_set)
baseline_accuracy = accuracy(confusion(baseline.predict_batch(held_out), labels))

print(f"\nheld-out accuracy : {held_out_accuracy:.2f}")
print(f"majority baseline : {baseline_accuracy:.2f}")

# ---------------------------------------------------------------------------
# Save, reload, and predict on fresh inputs. The artifact directory holds
# the weights, tokenizer vocabulary, configuration, and a manifest with the
# training-set digest, so a load is fully reproducible.
# ---------------------------------------------------------------------------

with tempfile.TemporaryDirectory() as tmp:
    model_dir = Path(tmp) / "detector"
    model.save(model_dir)
    print(f"\nartifact files: {sorted(p.name for p in model_dir.iterdir())}")
    reloaded = load_model(model_dir)

    suspect = ChatQuad(
        ctx_src="今日 映画 好き。", ctx_tgt="I like movie today.",
        resp_src="明日 旅行 行く。", resp_tgt=f"We travel {SENTINEL} tomorrow.",
        direction="ja-en", chat_id="live", index=1, origin="mt_low",
    )
    clean = ChatQuad(
        ctx_src="今日 映画 好き。", ctx_tgt="I like movie today.",
        resp_src="明日 旅行 行く。", resp_tgt="We travel somewhere tomorrow.",
        direction="ja-en", chat_id="live", index=1, origin="mt_low",
    )
    for name, quad in (("suspect", suspect), ("clean", clean)):
        prediction = reloaded.predict(quad)
        print(f"{name:>8}: label={prediction.label:<9} "
              f"p(erroneous)={prediction.prob_erroneous:.4f}")
