"""Detector evaluation: erroneous-positive confusion matrices, precision /
recall / F1 and accuracy against trivial baselines, and the BLEU-vs-label
analysis that surfaces high-overlap translations still labeled erroneous.

All percentages are rounded half-up to 2 decimals; the arithmetic runs on
exact rationals so the rounding is reproducible.
"""

import json
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from fractions import Fraction
from pathlib import Path

from .bleu import BleuConfig, sentence_bleu
from .corpus import CONTEXT_ORIGIN_ORDER, CORRECT, ERRONEOUS, ORIGINS
from .errors import ValidationError
from .jsonl import read_records, write_records

PREDICTION_FIELDS = ("chat_id", "index", "origin", "direction", "prob_erroneous", "predicted_label")


def round_pct(fraction):
    """Round an exact Fraction in [0, 1] to a percentage with 2 decimals, half-up."""
    value = Decimal(fraction.numerator) * 100 / Decimal(fraction.denominator)
    return float(value.quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


@dataclass(frozen=True)
class ConfusionMatrix:
    """Binary confusion counts with erroneous as the positive class."""

    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0

    def __post_init__(self):
        if min(self.tp, self.fp, self.fn, self.tn) < 0:
            raise ValidationError("confusion counts must be non-negative")

    def __add__(self, other):
        return ConfusionMatrix(
            self.tp + other.tp, self.fp + other.fp, self.fn + other.fn, self.tn + other.tn
        )

    @property
    def total(self):
        return self.tp + self.fp + self.fn + self.tn

    def to_dict(self):
        return {"tp": self.tp, "fp": self.fp, "fn": self.fn, "tn": self.tn}


def _label_of(item):
    label = getattr(item, "label", item)
    if label not in (CORRECT, ERRONEOUS):
        raise ValidationError(f"unknown label {label!r}")
    return label


def confusion(predictions, labels):
    """Count the four outcomes over index-aligned predictions and true labels."""
    if len(predictions) != len(labels):
        raise ValidationError("predictions and labels must have equal length")
    tp = fp = fn = tn = 0
    for pred, gold in zip(predictions, labels):
        pred, gold = _label_of(pred), _label_of(gold)
        if pred == ERRONEOUS and gold == ERRONEOUS:
            tp += 1
        elif pred == ERRONEOUS:
            fp += 1
        elif gold == ERRONEOUS:
            fn += 1
        else:
            tn += 1
    return ConfusionMatrix(tp, fp, fn, tn)


def prf(cm):
    """Precision, recall, F1 as percentages (zero denominators yield 0)."""
    precision = Fraction(cm.tp, cm.tp + cm.fp) if cm.tp + cm.fp else Fraction(0)
    recall = Fraction(cm.tp, cm.tp + cm.fn) if cm.tp + cm.fn else Fraction(0)
    if precision + recall > 0:
        f1 = 2 * precision * recall / (precision + recall)
    else:
        f1 = Fraction(0)
    return round_pct(precision), round_pct(recall), round_pct(f1)


def accuracy(cm):
    """(tp + tn) / total as a percentage."""
    if cm.total == 0:
        raise ValidationError("accuracy of an empty matrix is undefined")
    return round_pct(Fraction(cm.tp + cm.tn, cm.total))


def baseline_accuracies(labels):
    """Accuracies of the always-majority and always-minority classifiers.

    Minority is reported as the complement of majority so the pair always
    totals exactly 100.00 after rounding.
    """
    if not labels:
        raise ValidationError("baseline accuracies need at least one label")
    erroneous = sum(1 for item in labels if _label_of(item) == ERRONEOUS)
    majority = round_pct(Fraction(max(erroneous, len(labels) - erroneous), len(labels)))
    minority = float(Decimal("100.00") - Decimal(str(majority)))
    return majority, minority


@dataclass(frozen=True)
class MetricsReport:
    """Per-direction evaluation summary mirroring the detector result tables."""

    direction: str
    matrix: ConfusionMatrix
    per_origin: dict = field(default_factory=dict)
    accuracy: float = 0.0
    precision: float = 0.0
    recall: float = 0.0
    f1: float = 0.0
    majority_accuracy: float = 0.0
    minority_accuracy: float = 0.0

    def to_dict(self):
        return {
            "direction": self.direction,
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "majority_accuracy": self.majority_accuracy,
            "minority_accuracy": self.minority_accuracy,
            "matrix": self.matrix.to_dict(),
            "per_origin": {origin: cm.to_dict() for origin, cm in self.per_origin.items()},
        }


def _origin_order(origins):
    known = [origin for origin in CONTEXT_ORIGIN_ORDER if origin in origins]
    return known + sorted(set(origins) - set(known))


def report_from_matrices(direction, per_origin, label_counts=None):
    """Assemble a MetricsReport from per-origin confusion matrices.

    label_counts optionally overrides the (erroneous, correct) totals used for
    the baselines; by default they are recovered from the matrices.
    """
    matrix = ConfusionMatrix()
    for cm in per_origin.values():
        matrix = matrix + cm
    if label_counts is None:
        label_counts = (matrix.tp + matrix.fn, matrix.fp + matrix.tn)
    erroneous, correct = label_counts
    labels = [ERRONEOUS] * erroneous + [CORRECT] * correct
    majority, minority = baseline_accuracies(labels)
    precision, recall, f1 = prf(matrix)
    ordered = {origin: per_origin[origin] for origin in _origin_order(per_origin)}
    return MetricsReport(
        direction=direction,
        matrix=matrix,
        per_origin=ordered,
        accuracy=accuracy(matrix),
        precision=precision,
        recall=recall,
        f1=f1,
        majority_accuracy=majority,
        minority_accuracy=minority,
    )


def build_report(examples, predictions):
    """Per-direction MetricsReports from labeled examples and aligned predictions."""
    if len(examples) != len(predictions):
        raise ValidationError("examples and predictions must have equal length")
    grouped = {}
    for example, prediction in zip(examples, predictions):
        direction = example.quad.direction
        origin = example.quad.origin
        cell = grouped.setdefault(direction, {}).setdefault(origin, [0, 0, 0, 0])
        pred, gold = _label_of(prediction), _label_of(example.label)
        if pred == ERRONEOUS and gold == ERRONEOUS:
            cell[0] += 1
        elif pred == ERRONEOUS:
            cell[1] += 1
        elif gold == ERRONEOUS:
            cell[2] += 1
        else:
            cell[3] += 1
    reports = {}
    for direction in sorted(grouped):
        per_origin = {
            origin: ConfusionMatrix(*cells) for origin, cells in grouped[direction].items()
        }
        reports[direction] = report_from_matrices(direction, per_origin)
    return reports


def render_report_text(reports):
    """Aligned-text tables: accuracy vs baselines, P/R/F, confusion matrices."""
    directions = [reports[d] for d in sorted(reports)]
    lines = ["Accuracy (%, erroneous = positive class)", ""]
    rows = [("direction", "majority", "minority", "detector")]
    for rep in directions:
        rows.append(
            (rep.direction, f"{rep.majority_accuracy:.2f}", f"{rep.minority_accuracy:.2f}", f"{rep.accuracy:.2f}")
        )
    lines.extend(_format_rows(rows))
    lines.extend(["", "Detector precision / recall / F1 (%)", ""])
    rows = [("direction", "precision", "recall", "f1")]
    for rep in directions:
        rows.append((rep.direction, f"{rep.precision:.2f}", f"{rep.recall:.2f}", f"{rep.f1:.2f}"))
    lines.extend(_format_rows(rows))
    lines.extend(["", "Confusion matrices (true class x predicted class)", ""])
    for rep in directions:
        blocks = list(rep.per_origin.items()) + [("all", rep.matrix)]
        for origin, cm in blocks:
            rows = [
                (f"{rep.direction}/{origin}", "pred:correct", "pred:erroneous"),
                ("true:correct", str(cm.tn), str(cm.fp)),
                ("true:erroneous", str(cm.fn), str(cm.tp)),
            ]
            lines.extend(_format_rows(rows))
            lines.append("")
    return "\n".join(lines).rstrip() + "\n"


def _format_rows(rows):
    widths = [max(len(row[col]) for row in rows) for col in range(len(rows[0]))]
    out = []
    for row in rows:
        cells = [row[0].ljust(widths[0])] + [
            cell.rjust(width) for cell, width in zip(row[1:], widths[1:])
        ]
        out.append("  ".join(cells).rstrip())
    return out


def write_report(reports, json_path, text_path):
    """Persist reports as both JSON and an aligned-text rendering."""
    payload = {direction: reports[direction].to_dict() for direction in sorted(reports)}
    Path(json_path).parent.mkdir(parents=True, exist_ok=True)
    Path(json_path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    Path(text_path).parent.mkdir(parents=True, exist_ok=True)
    Path(text_path).write_text(render_report_text(reports), encoding="utf-8")


@dataclass(frozen=True)
class PredictionRecord:
    """One serialized prediction, joinable to its example by (chat_id, index, origin)."""

    chat_id: str
    index: int
    origin: str
    direction: str
    prob_erroneous: float
    predicted_label: str

    def to_dict(self):
        return {
            "chat_id": self.chat_id,
            "index": self.index,
            "origin": self.origin,
            "direction": self.direction,
            "prob_erroneous": self.prob_erroneous,
            "predicted_label": self.predicted_label,
        }

    @property
    def label(self):
        return self.predicted_label


def write_predictions(path, records):
    write_records(path, (record.to_dict() for record in records))


def read_predictions(path):
    records = []
    for line_no, raw in read_records(path):
        missing = [key for key in PREDICTION_FIELDS if key not in raw]
        if missing:
            raise ValidationError(f"{path}:{line_no}: prediction record missing {missing}")
        if raw["origin"] not in ORIGINS:
            raise ValidationError(f"{path}:{line_no}: unknown origin {raw['origin']!r}")
        if raw["predicted_label"] not in (CORRECT, ERRONEOUS):
            raise ValidationError(f"{path}:{line_no}: unknown label {raw['predicted_label']!r}")
        records.append(PredictionRecord(**{key: raw[key] for key in PREDICTION_FIELDS}))
    return records


def bleu_vs_label_report(examples, references, cfg=BleuConfig(), threshold=70.0, predictions=None):
    """Surface translations scoring BLEU >= threshold yet flagged erroneous.

    references maps (chat_id, index) to the reference translation of the
    response. When predictions are given the flag is the predicted label,
    otherwise the gold label. The BLEU configuration is embedded in the report.
    """
    if predictions is not None and len(predictions) != len(examples):
        raise ValidationError("predictions and examples must have equal length")
    items = []
    for position, example in enumerate(examples):
        quad = example.quad
        key = (quad.chat_id, quad.index)
        if key not in references:
            raise ValidationError(f"missing reference for chat_id={quad.chat_id} index={quad.index}")
        flag = _label_of(predictions[position]) if predictions is not None else example.label
        if flag != ERRONEOUS:
            continue
        score = sentence_bleu(quad.resp_tgt, references[key], cfg)
        if score >= threshold:
            items.append(
                {
                    "chat_id": quad.chat_id,
                    "index": quad.index,
                    "origin": quad.origin,
                    "direction": quad.direction,
                    "bleu": round(score, 2),
                    "label": example.label,
                    "flag": flag,
                    "hypothesis": quad.resp_tgt,
                    "reference": references[key],
                }
            )
    items.sort(key=lambda item: (-item["bleu"], item["chat_id"], item["index"], item["origin"]))
    return {"config": cfg.to_dict(), "threshold": threshold, "items": items}
