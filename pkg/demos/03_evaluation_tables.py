"""
Evaluation arithmetic: confusion counts to headline tables
==========================================================

Every headline metric the package reports is pure arithmetic over per-origin
confusion counts, with the erroneous class as the positive prediction. This
walkthrough feeds in the reference counts for both translation directions,
renders the full report, and then contrasts surface n-gram overlap (BLEU)
with semantic judgments to show why overlap alone cannot catch a fluent but
wrong translation.
"""

from chatqe.bleu import PLAIN_CONFIG, BleuConfig, sentence_bleu
from chatqe.evaluation import (
    ConfusionMatrix,
    bleu_vs_label_report,
    render_report_text,
    report_from_matrices,
)

# ---------------------------------------------------------------------------
# Reference confusion counts per translation origin: professional human,
# low-quality machine (model A), high-quality machine (model B). Rows are
# the true class, columns the prediction; tp counts "erroneous predicted
# erroneous".
# ---------------------------------------------------------------------------

ja_en = {
    "human": ConfusionMatrix(tp=21, fp=207, fn=290, tn=1879),
    "mt_low": ConfusionMatrix(tp=2140, fp=155, fn=90, tn=11),
    "mt_high": ConfusionMatrix(tp=181, fp=590, fn=374, tn=1252),
}
en_ja = {
    "human": ConfusionMatrix(tp=9, fp=176, fn=83, tn=2406),
    "mt_low": ConfusionMatrix(tp=2350, fp=265, fn=53, tn=6),
    "mt_high": ConfusionMatrix(tp=406, fp=758, fn=505, tn=1005),
}

reports = {
    "ja-en": report_from_matrices("ja-en", ja_en),
    "en-ja": report_from_matrices("en-ja", en_ja),
}
print(render_report_text(reports))

# The headline numbers in one line each (percentages, half-up rounding):
for direction, report in reports.items():
    print(f"{direction}: accuracy={report.accuracy}  P={report.precision} "
          f"R={report.recall} F1={report.f1}  "
          f"majority={report.majority_accuracy} minority={report.minority_accuracy}")

# ---------------------------------------------------------------------------
# Sentence BLEU. The pair below differs by one content word; every metric
# ingredient can be counted by hand under the plain unsmoothed
# configuration: modified precisions 6/7, 4/6, 2/5, 1/4, no brevity penalty.
# ---------------------------------------------------------------------------

hypothesis = "I had America as my dinner."
reference = "I had rice as my dinner."

plain = sentence_bleu(hypothesis, reference, PLAIN_CONFIG)
hand = 100.0 * (6 / 7 * 4 / 6 * 2 / 5 * 1 / 4) ** 0.25
print(f"\nplain BLEU          : {plain:.4f} (hand-computed {hand:.4f})")
print(f"identity BLEU       : {sentence_bleu(reference, reference, PLAIN_CONFIG):.1f}")
print(f"add-k smoothed BLEU : {sentence_bleu(hypothesis, reference):.4f}")
print(f"char-level BLEU     : "
      f"{sentence_bleu('晩ご飯に米を', '晩ご飯に飯を', BleuConfig(tokenizer='char')):.4f}")

# ---------------------------------------------------------------------------
# High overlap does not mean correct. The report below lists examples that
# were judged erroneous yet score above a BLEU threshold against their
# reference — exactly the failure mode a learned detector exists to catch.
# ---------------------------------------------------------------------------

from chatqe.corpus import ChatQuad, LabeledExample


def example(chat_id, resp_tgt, label):
    quad = ChatQuad(ctx_src="c", ctx_tgt="c", resp_src="r", resp_tgt=resp_tgt,
                    direction="ja-en", chat_id=chat_id, index=1, origin="mt_high")
    return LabeledExample(quad=quad, label=label)


references = {
    ("meal", 1): "I had rice as my dinner.",
    ("time", 1): "See you at the station tonight.",
    ("weather", 1): "It is sunny and warm today.",
}
examples = [
    example("meal", "I had America as my dinner.", "erroneous"),
    example("time", "See you at the station tomorrow.", "erroneous"),
    example("weather", "It is sunny and warm today.", "correct"),
]
report = bleu_vs_label_report(examples, references, cfg=PLAIN_CONFIG, threshold=45.0)
print(f"\nerroneous translations with BLEU >= {report['threshold']}:")
for item in report["items"]:
    print(f"  BLEU {item['bleu']:.1f}  {item['chat_id']}: {item['hypothesis']}")
