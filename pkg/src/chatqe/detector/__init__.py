"""Erroneous-translation detector: input assembly, training, prediction,
and trivial baselines. Model training/inference pieces import torch lazily so
the rest of the package works without it.
"""

from .baselines import ConstantDetector, majority_classifier, minority_classifier
from .inputs import DetectorInput, assemble_input, collate_batch
from .tokenizer import WordVocabTokenizer
from .types import Prediction, prediction_from_prob

_LAZY = {"DetectorModel", "load_model", "DetectorConfig", "train", "generate_training_set"}


def __getattr__(name):
    if name in {"DetectorModel", "load_model"}:
        from . import model

        return getattr(model, name)
    if name in {"DetectorConfig", "train", "generate_training_set"}:
        from . import training

        return getattr(training, name)
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")


__all__ = [
    "ConstantDetector",
    "DetectorInput",
    "Prediction",
    "WordVocabTokenizer",
    "assemble_input",
    "collate_batch",
    "majority_classifier",
    "minority_classifier",
    "prediction_from_prob",
    *sorted(_LAZY),
]
