"""Evaluation: exact rounding, confusion arithmetic, published-table closure,
baselines, prediction files, and the BLEU-vs-label report."""

import random
from fractions import Fraction

import pytest

from chatqe.bleu import PLAIN_CONFIG
from chatqe.corpus import LabeledExample
from chatqe.errors import ValidationError
from chatqe.evaluation import (
    ConfusionMatrix,
    PredictionRecord,
    accuracy,
    baseline_accuracies,
    bleu_vs_label_report,
    build_report,
    confusion,
    prf,
    read_predictions,
    render_report_text,
    report_from_matrices,
    round_pct,
    write_predictions,
    write_report,
)

from helpers import make_example, make_quad

# Published per-origin confusion counts (true class x predicted class, with
# erroneous as the positive prediction). These twelve cells per direction are
# the arithmetic source of every headline metric the package must reproduce.
JA_EN_MATRICES = {
    "human": ConfusionMatrix(tp=21, fp=207, fn=290, tn=1879),
    "mt_low": ConfusionMatrix(tp=2140, fp=155, fn=90, tn=11),
    "mt_high": ConfusionMatrix(tp=181, fp=590, fn=374, tn=1252),
}
EN_JA_MATRICES = {
    "human": ConfusionMatrix(tp=9, fp=176, fn=83, tn=2406),
    "mt_low": ConfusionMatrix(tp=2350, fp=265, fn=53, tn=6),
    "mt_high": ConfusionMatrix(tp=406, fp=758, fn=505, tn=1005),
}


# -------------------------------------------------------------------- rounding


def test_round_pct_half_up():
    assert round_pct(Fraction(1, 2)) == 50.0
    assert round_pct(Fraction(1, 8)) == 12.5
    # exact .005 cases round up, not to even
    assert round_pct(Fraction(25, 2000)) == 1.25
    assert round_pct(Fraction(1005, 100000)) == 1.01
    assert round_pct(Fraction(9995, 1000000)) == 1.0
    assert round_pct(Fraction(1)) == 100.0
    assert round_pct(Fraction(0)) == 0.0


# ------------------------------------------------------------------- confusion


def test_confusion_counts_four_outcomes():
    preds = ["erroneous", "erroneous", "correct", "correct"]
    golds = ["erroneous", "correct", "erroneous", "correct"]
    cm = confusion(preds, golds)
    assert (cm.tp, cm.fp, cm.fn, cm.tn) == (1, 1, 1, 1)
    assert cm.total == 4


def test_confusion_duck_types_label_attribute():
    preds = [PredictionRecord("c", 1, "human", "ja-en", 0.9, "erroneous")]
    golds = [make_example(label="correct")]
    cm = confusion(preds, golds)
    assert (cm.tp, cm.fp, cm.fn, cm.tn) == (0, 1, 0, 0)


def test_confusion_rejects_bad_input():
    with pytest.raises(ValidationError):
        confusion(["erroneous"], [])
    with pytest.raises(ValidationError):
        confusion(["maybe"], ["correct"])
    with pytest.raises(ValidationError):
        ConfusionMatrix(tp=-1)


def test_prf_and_accuracy_agree_with_brute_force():
    """Oracle equivalence: recount every outcome from the raw lists."""
    rng = random.Random(515)
    for _ in range(30):
        n = rng.randint(1, 200)
        preds = [rng.choice(["correct", "erroneous"]) for _ in range(n)]
        golds = [rng.choice(["correct", "erroneous"]) for _ in range(n)]
        cm = confusion(preds, golds)
        tp = sum(p == g == "erroneous" for p, g in zip(preds, golds))
        fp = sum(p == "erroneous" and g == "correct" for p, g in zip(preds, golds))
        fn = sum(p == "correct" and g == "erroneous" for p, g in zip(preds, golds))
        tn = sum(p == g == "correct" for p, g in zip(preds, golds))
        assert (cm.tp, cm.fp, cm.fn, cm.tn) == (tp, fp, fn, tn)
        p_pct, r_pct, f_pct = prf(cm)
        precision = Fraction(tp, tp + fp) if tp + fp else Fraction(0)
        recall = Fraction(tp, tp + fn) if tp + fn else Fraction(0)
        f1 = (2 * precision * recall / (precision + recall)
              if precision + recall else Fraction(0))
        assert (p_pct, r_pct, f_pct) == (round_pct(precision), round_pct(recall),
                                         round_pct(f1))
        assert accuracy(cm) == round_pct(Fraction(tp + tn, n))


def test_partition_property():
    """Summed per-origin matrices equal the whole-set matrix."""
    rng = random.Random(777)
    for _ in range(20):
        examples, preds = [], []
        for i in range(rng.randint(1, 120)):
            origin = rng.choice(["human", "mt_low", "mt_high"])
            examples.append(make_example(
                label=rng.choice(["correct", "erroneous"]), chat_id=f"c{i}",
                origin=origin))
            preds.append(rng.choice(["correct", "erroneous"]))
        reports = build_report(examples, preds)
        for rep in reports.values():
            summed = ConfusionMatrix()
            for cm in rep.per_origin.values():
                summed = summed + cm
            assert summed == rep.matrix
        whole = confusion(preds, [e.label for e in examples])
        total = ConfusionMatrix()
        for rep in reports.values():
            total = total + rep.matrix
        assert total == whole


# ------------------------------------------------------------------- baselines


def test_baselines_sum_to_100_exactly():
    rng = random.Random(31)
    for _ in range(50):
        n = rng.randint(1, 500)
        labels = [rng.choice(["correct", "erroneous"]) for _ in range(n)]
        majority, minority = baseline_accuracies(labels)
        assert majority + minority == 100.0
        assert majority >= 50.0 - 1e-9


def test_balanced_set_baselines():
    majority, minority = baseline_accuracies(["correct", "erroneous"] * 10)
    assert (majority, minority) == (50.0, 50.0)


def test_baselines_empty_rejected():
    with pytest.raises(ValidationError):
        baseline_accuracies([])


# ------------------------------------------------- published-numbers closure


def test_ja_en_closure():
    report = report_from_matrices("ja-en", JA_EN_MATRICES)
    assert report.matrix.total == 7190
    assert (report.precision, report.recall, report.f1) == (71.10, 75.65, 73.30)
    assert report.accuracy == 76.27
    assert (report.majority_accuracy, report.minority_accuracy) == (56.94, 43.06)


def test_en_ja_closure():
    report = report_from_matrices("en-ja", EN_JA_MATRICES)
    assert report.matrix.total == 8022
    assert (report.precision, report.recall, report.f1) == (69.75, 81.18, 75.03)
    assert report.accuracy == 77.06
    assert (report.majority_accuracy, report.minority_accuracy) == (57.54, 42.46)


def test_report_reconstructed_from_examples_matches_matrices():
    """Route the same counts through build_report and get identical reports."""
    examples, preds = [], []
    i = 0
    for origin, cm in JA_EN_MATRICES.items():
        for pred, gold, count in (
            ("erroneous", "erroneous", cm.tp),
            ("erroneous", "correct", cm.fp),
            ("correct", "erroneous", cm.fn),
            ("correct", "correct", cm.tn),
        ):
            for _ in range(count):
                examples.append(make_example(label=gold, chat_id=f"c{i}",
                                             origin=origin))
                preds.append(pred)
                i += 1
    report = build_report(examples, preds)["ja-en"]
    assert report == report_from_matrices("ja-en", JA_EN_MATRICES)


# ------------------------------------------------------------------ rendering


def test_render_and_write_report(tmp_path):
    reports = {
        "ja-en": report_from_matrices("ja-en", JA_EN_MATRICES),
        "en-ja": report_from_matrices("en-ja", EN_JA_MATRICES),
    }
    text = render_report_text(reports)
    for token in ("76.27", "77.06", "71.10", "75.03", "56.94", "42.46",
                  "true:erroneous", "pred:correct"):
        assert token in text
    # per-origin blocks appear in reliability order plus the summed block
    assert text.index("ja-en/human") < text.index("ja-en/mt_high") < text.index("ja-en/mt_low") < text.index("ja-en/all")

    write_report(reports, tmp_path / "eval_report.json", tmp_path / "eval_report.txt")
    import json
    payload = json.loads((tmp_path / "eval_report.json").read_text())
    assert payload["ja-en"]["accuracy"] == 76.27
    assert payload["en-ja"]["matrix"] == {"tp": 2765, "fp": 1199, "fn": 641, "tn": 3417}
    assert (tmp_path / "eval_report.txt").read_text() == text


# ----------------------------------------------------------- prediction files


def test_predictions_roundtrip(tmp_path):
    records = [
        PredictionRecord("c0", 1, "human", "ja-en", 0.12, "correct"),
        PredictionRecord("c0", 2, "mt_low", "ja-en", 0.93, "erroneous"),
    ]
    path = tmp_path / "predictions.jsonl"
    write_predictions(path, records)
    assert read_predictions(path) == records


def test_predictions_validation(tmp_path):
    path = tmp_path / "predictions.jsonl"
    path.write_text('{"chat_id": "c0", "index": 1}\n', encoding="utf-8")
    with pytest.raises(ValidationError) as err:
        read_predictions(path)
    assert "missing" in str(err.value)
    path.write_text(
        '{"chat_id":"c0","index":1,"origin":"human","direction":"ja-en",'
        '"prob_erroneous":0.5,"predicted_label":"dubious"}\n', encoding="utf-8")
    with pytest.raises(ValidationError):
        read_predictions(path)


# ------------------------------------------------------------- BLEU vs labels


def test_bleu_vs_label_report_surfaces_planted_items():
    """Three planted high-overlap erroneous items must all be reported."""
    refs = {}
    examples = []
    planted = [
        ("p0", "I had rice as my dinner.", "I had America as my dinner."),
        ("p1", "See you at the station tonight.", "See you at the station tomorrow."),
        ("p2", "My cat sleeps all day long.", "My dog sleeps all day long."),
    ]
    for cid, ref, hyp in planted:
        refs[(cid, 1)] = ref
        examples.append(make_example(label="erroneous", chat_id=cid, index=1,
                                     resp_tgt=hyp))
    # distractors: correct high-BLEU and erroneous low-BLEU
    refs[("d0", 1)] = "The weather is nice today."
    examples.append(make_example(label="correct", chat_id="d0", index=1,
                                 resp_tgt="The weather is nice today."))
    refs[("d1", 1)] = "Completely unrelated reference text."
    examples.append(make_example(label="erroneous", chat_id="d1", index=1,
                                 resp_tgt="zebra quartz violin"))

    report = bleu_vs_label_report(examples, refs, cfg=PLAIN_CONFIG, threshold=45.0)
    assert {item["chat_id"] for item in report["items"]} == {"p0", "p1", "p2"}
    bleus = [item["bleu"] for item in report["items"]]
    assert bleus == sorted(bleus, reverse=True)
    assert all(item["bleu"] >= 45.0 for item in report["items"])
    assert report["config"] == PLAIN_CONFIG.to_dict()
    assert report["threshold"] == 45.0


def test_bleu_vs_label_uses_predictions_when_given():
    refs = {("c0", 1): "exact same text here."}
    examples = [make_example(label="correct", chat_id="c0", index=1,
                             resp_tgt="exact same text here.")]
    # gold says correct -> empty without predictions
    assert bleu_vs_label_report(examples, refs, cfg=PLAIN_CONFIG,
                                threshold=50.0)["items"] == []
    # a predicted-erroneous flag surfaces it, and the item keeps the gold label
    report = bleu_vs_label_report(examples, refs, cfg=PLAIN_CONFIG, threshold=50.0,
                                  predictions=["erroneous"])
    assert len(report["items"]) == 1
    assert report["items"][0]["label"] == "correct"
    assert report["items"][0]["flag"] == "erroneous"
    assert report["items"][0]["bleu"] == 100.0


def test_bleu_vs_label_missing_reference_rejected():
    examples = [make_example(label="erroneous", chat_id="nope", index=3)]
    with pytest.raises(ValidationError):
        bleu_vs_label_report(examples, {})
