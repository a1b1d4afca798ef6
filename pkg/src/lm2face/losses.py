"""Training objectives: adversarial pair, perceptual, gender-preserving, L1,
and the weighted composite.

All probability inputs are clamped to [eps, 1 - eps] so every loss stays
finite for any sigmoid output.  Patch score maps are averaged, not summed,
keeping magnitudes independent of the patch grid resolution.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import torch

from .errors import TrainingError, ValidationError

EPSILON = 1e-7


@dataclass(frozen=True)
class LossWeights:
    """Weights of the perceptual, gender and L1 terms (adversarial weight is 1)."""

    lambda_p: float = 1.0
    lambda_c: float = 1.0
    lambda_1: float = 100.0

    def __post_init__(self):
        for name in ("lambda_p", "lambda_c", "lambda_1"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0:
                raise ValidationError(f"{name} must be finite and >= 0, got {v}")


@dataclass(frozen=True)
class LossReport:
    """Per-step loss breakdown; l_total is recomputed from the reported
    per-term values, so the decomposition identity holds exactly."""

    step: int
    l_adv: float
    l_perc: float
    l_gender: float
    l_l1: float
    l_total: float

    def to_json_line(self) -> str:
        return json.dumps({
            "step": self.step,
            "l_adv": self.l_adv,
            "l_perc": self.l_perc,
            "l_gender": self.l_gender,
            "l_l1": self.l_l1,
            "l_total": self.l_total,
        })

    @classmethod
    def from_json_line(cls, line: str) -> "LossReport":
        obj = json.loads(line)
        return cls(step=obj["step"], l_adv=obj["l_adv"], l_perc=obj["l_perc"],
                   l_gender=obj["l_gender"], l_l1=obj["l_l1"], l_total=obj["l_total"])


def _clamp_prob(p: torch.Tensor) -> torch.Tensor:
    return torch.clamp(p, EPSILON, 1.0 - EPSILON)


def d_loss(d_real_scores: torch.Tensor, d_fake_scores: torch.Tensor) -> torch.Tensor:
    """Discriminator objective: -mean log D(real) - mean log(1 - D(fake)).

    Patch maps are averaged over batch and grid.  Callers must detach the
    fake branch from the generator.
    """
    real = _clamp_prob(d_real_scores)
    fake = _clamp_prob(d_fake_scores)
    return -torch.log(real).mean() - torch.log(1.0 - fake).mean()


def g_adv_loss(d_fake_scores: torch.Tensor) -> torch.Tensor:
    """Generator adversarial term: -mean log D(fake)."""
    return -torch.log(_clamp_prob(d_fake_scores)).mean()


def perceptual_loss(fake: torch.Tensor, real: torch.Tensor, extractor) -> torch.Tensor:
    """Mean absolute difference between deep features of fake and real batches."""
    if fake.shape != real.shape:
        raise ValidationError(f"batch shapes differ: {tuple(fake.shape)} vs {tuple(real.shape)}")
    return (extractor(fake) - extractor(real).detach()).abs().mean()


def gender_loss(real: torch.Tensor, fake: torch.Tensor, classifier,
                literal_formula: bool = False,
                hard_labels: torch.Tensor | None = None) -> torch.Tensor:
    """Cross-entropy between the frozen classifier's verdicts on real and fake.

    The classifier score on the real image acts as a soft target (or, with
    ``hard_labels``, the dataset gender label).  ``literal_formula`` selects
    the variant whose second term uses log C(fake) instead of log(1 - C(fake)).
    """
    if hard_labels is not None:
        target = hard_labels.to(fake.dtype)
    else:
        with torch.no_grad():
            target = classifier.score(real)
    p_fake = _clamp_prob(classifier.score(fake))
    second = torch.log(p_fake) if literal_formula else torch.log(1.0 - p_fake)
    return -(target * torch.log(p_fake) + (1.0 - target) * second).mean()


def l1_loss(fake: torch.Tensor, real: torch.Tensor) -> torch.Tensor:
    """Mean absolute pixel difference."""
    if fake.shape != real.shape:
        raise ValidationError(f"batch shapes differ: {tuple(fake.shape)} vs {tuple(real.shape)}")
    return (fake - real).abs().mean()


def composite_loss(l_adv, l_perc, l_gender, l_l1, weights: LossWeights,
                   step: int = 0) -> tuple[torch.Tensor, LossReport]:
    """Weighted total for the generator update plus its per-term report.

    Raises TrainingError naming the first non-finite term.
    """
    terms = {"l_adv": l_adv, "l_perc": l_perc, "l_gender": l_gender, "l_l1": l_l1}
    values = {}
    for name, term in terms.items():
        value = float(term.detach()) if torch.is_tensor(term) else float(term)
        if not math.isfinite(value):
            raise TrainingError(f"non-finite loss term {name} = {value}")
        values[name] = value

    def as_tensor(t):
        return t if torch.is_tensor(t) else torch.tensor(float(t))

    total = (as_tensor(l_adv)
             + weights.lambda_p * as_tensor(l_perc)
             + weights.lambda_c * as_tensor(l_gender)
             + weights.lambda_1 * as_tensor(l_l1))
    report = LossReport(
        step=step,
        l_adv=values["l_adv"],
        l_perc=values["l_perc"],
        l_gender=values["l_gender"],
        l_l1=values["l_l1"],
        l_total=(values["l_adv"]
                 + weights.lambda_p * values["l_perc"]
                 + weights.lambda_c * values["l_gender"]
                 + weights.lambda_1 * values["l_l1"]),
    )
    return total, report
