"""Linear max-margin classifier trained with stochastic subgradient descent
on the L2-regularized hinge loss."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ValidationError


@dataclass
class LinearClassifier:
    weights: np.ndarray
    bias: float
    regularization: float

    def decision(self, features: np.ndarray) -> np.ndarray:
        x = np.asarray(features, dtype=np.float64)
        if x.ndim == 1:
            x = x[None]
        if x.shape[1] != self.weights.shape[0]:
            raise ValidationError(
                f"feature dimension {x.shape[1]} != classifier dimension {self.weights.shape[0]}")
        return x @ self.weights + self.bias

    def predict(self, features: np.ndarray) -> np.ndarray:
        """Labels in {-1, +1}; ties go to +1."""
        return np.where(self.decision(features) >= 0.0, 1, -1)


def _check_xy(features, labels):
    x = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    if x.ndim != 2:
        raise ValidationError(f"features must be 2-D (n, d), got shape {x.shape}")
    if y.shape != (x.shape[0],):
        raise ValidationError(f"labels shape {y.shape} does not match {x.shape[0]} samples")
    if not np.isin(y, (-1.0, 1.0)).all():
        raise ValidationError("labels must be -1 or +1")
    return x, y


def train_classifier(features, labels, reg: float = 1e-3, epochs: int = 40,
                     seed: int = 0) -> LinearClassifier:
    """Hinge-loss + L2 minimization by per-sample subgradient steps with the
    classic 1/(reg * t) rate; the bias is unregularized."""
    x, y = _check_xy(features, labels)
    if len(np.unique(y)) < 2:
        raise ValidationError("training set must contain both classes")
    if reg <= 0:
        raise ValidationError("regularization strength must be positive")
    rng = np.random.Generator(np.random.PCG64(seed))
    n, d = x.shape
    w = np.zeros(d)
    b = 0.0
    t = 0
    for _ in range(epochs):
        for i in rng.permutation(n):
            t += 1
            eta = 1.0 / (reg * t)
            margin = y[i] * (x[i] @ w + b)
            w *= 1.0 - eta * reg
            if margin < 1.0:
                w += eta * y[i] * x[i]
                b += eta * y[i]
    return LinearClassifier(weights=w, bias=float(b), regularization=reg)


def evaluate(clf: LinearClassifier, features, labels) -> float:
    """Fraction of correct predictions."""
    x, y = _check_xy(features, labels)
    return float((clf.predict(x) == y).mean())
