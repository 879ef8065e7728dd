"""Trivial baseline classifiers calibrated on a labeled set."""

from ..corpus import CORRECT, ERRONEOUS
from ..errors import ValidationError
from .types import Prediction


class ConstantDetector:
    """Predicts one fixed label for every input."""

    def __init__(self, label):
        prob = 1.0 if label == ERRONEOUS else 0.0
        self.prediction = Prediction(label=label, prob_erroneous=prob)

    def predict(self, quad):
        return self.prediction

    def predict_batch(self, quads):
        return [self.prediction for _ in quads]


def _label_counts(examples):
    if not examples:
        raise ValidationError("baseline classifiers need a non-empty calibration set")
    erroneous = sum(1 for example in examples if example.label == ERRONEOUS)
    return erroneous, len(examples) - erroneous


def majority_classifier(examples):
    """Constant predictor of the majority label (ties go to correct)."""
    erroneous, correct = _label_counts(examples)
    return ConstantDetector(ERRONEOUS if erroneous > correct else CORRECT)


def minority_classifier(examples):
    """Constant predictor of the minority label (ties go to erroneous)."""
    erroneous, correct = _label_counts(examples)
    return ConstantDetector(CORRECT if erroneous > correct else ERRONEOUS)
