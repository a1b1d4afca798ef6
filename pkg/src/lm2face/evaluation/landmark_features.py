"""Landmark-only gender features: all-pairs distances or segment angles.

Distance mode normalizes every pairwise Euclidean distance by the
inter-ocular distance (between the two eye-landmark centroids), making the
feature invariant under translation, rotation and uniform scaling.  Angle
mode records the signed angle of each connecting segment against the
horizontal axis in (-pi, pi].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateInputError, ValidationError
from ..landmarks import LEFT_EYE, RIGHT_EYE, N_POINTS, LandmarkSet

N_PAIRS = N_POINTS * (N_POINTS - 1) // 2  # 2278

MODES = ("distance", "angle")


@dataclass(frozen=True)
class LandmarkFeature:
    mode: str
    vector: np.ndarray

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValidationError(f"mode must be one of {MODES}, got {self.mode!r}")
        vec = np.asarray(self.vector, dtype=np.float64)
        if vec.shape != (N_PAIRS,):
            raise ValidationError(f"feature vector must have length {N_PAIRS}, got {vec.shape}")
        vec = vec.copy()
        vec.flags.writeable = False
        object.__setattr__(self, "vector", vec)


def interocular_distance(points: np.ndarray) -> float:
    """Distance between the left and right eye landmark centroids."""
    pts = np.asarray(points, dtype=np.float64)
    left = pts[list(LEFT_EYE)].mean(axis=0)
    right = pts[list(RIGHT_EYE)].mean(axis=0)
    return float(np.hypot(*(right - left)))


def landmark_features(lm: LandmarkSet | np.ndarray, mode: str = "distance") -> LandmarkFeature:
    """2278-dimensional pairwise feature vector of a landmark set."""
    if mode not in MODES:
        raise ValidationError(f"mode must be one of {MODES}, got {mode!r}")
    pts = np.asarray(lm.points if isinstance(lm, LandmarkSet) else lm, dtype=np.float64)
    if pts.shape != (N_POINTS, 2):
        raise ValidationError(f"expected {N_POINTS} points, got shape {pts.shape}")
    iu, ju = np.triu_indices(N_POINTS, k=1)
    dx = pts[ju, 0] - pts[iu, 0]
    dy = pts[ju, 1] - pts[iu, 1]
    if mode == "distance":
        iod = interocular_distance(pts)
        if iod <= 0.0 or not np.isfinite(iod):
            raise DegenerateInputError("zero inter-ocular distance; cannot normalize")
        vec = np.hypot(dx, dy) / iod
    else:
        vec = np.arctan2(dy, dx)
        # arctan2 returns -pi for straight-left segments; fold onto (-pi, pi]
        vec[vec == -np.pi] = np.pi
    return LandmarkFeature(mode=mode, vector=vec)
