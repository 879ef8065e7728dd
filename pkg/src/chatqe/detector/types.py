"""Prediction value type shared by the trained detector and the baselines."""

from dataclasses import dataclass

from ..corpus import CORRECT, ERRONEOUS
from ..errors import ValidationError

DEFAULT_THRESHOLD = 0.5


@dataclass(frozen=True)
class Prediction:
    """A binary verdict with the probability assigned to the erroneous class."""

    label: str
    prob_erroneous: float

    def __post_init__(self):
        if self.label not in (CORRECT, ERRONEOUS):
            raise ValidationError(f"unknown prediction label {self.label!r}")
        if not 0.0 <= self.prob_erroneous <= 1.0:
            raise ValidationError("prob_erroneous must be in [0, 1]")


def prediction_from_prob(prob_erroneous, threshold=DEFAULT_THRESHOLD):
    """Label is erroneous iff prob_erroneous >= threshold."""
    label = ERRONEOUS if prob_erroneous >= threshold else CORRECT
    return Prediction(label=label, prob_erroneous=prob_erroneous)
