"""Gaussian heatmap encoding of landmark sets.

Each landmark contributes an unnormalized Gaussian bump (peak 1); the map is
the per-pixel MAX over all bumps, so overlapping points never exceed 1 and
coincident points are idempotent.  Landmark positions are snapped to their
nearest pixel before rendering, which makes the peak value exactly 1.0 at
that pixel and keeps integer-pixel translations exact.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import ValidationError
from .landmarks import LandmarkSet

DEFAULT_SIZE = 64
DEFAULT_SIGMA_PX = 2.0


def sigma_from_mode(mode: str, size: int = DEFAULT_SIZE) -> float:
    """Resolve a sigma configuration name to pixels.

    "default"    -> 2.0 px
    "literal-px" -> 0.2 px (visually degenerate, kept selectable)
    "normalized" -> 0.2 * size px (merges neighboring blobs at 64 px)
    """
    if mode == "default":
        return DEFAULT_SIGMA_PX
    if mode == "literal-px":
        return 0.2
    if mode == "normalized":
        return 0.2 * size
    raise ValidationError(f"unknown sigma mode {mode!r}")


@dataclass(frozen=True)
class HeatmapTensor:
    """Single-channel HxW rendering of a landmark set, values in [0, 1]."""

    data: np.ndarray
    sigma_px: float

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValidationError(f"heatmap must be square 2-D, got shape {arr.shape}")
        if arr.min() < 0.0 or arr.max() > 1.0:
            raise ValidationError("heatmap values must lie in [0, 1]")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @property
    def size(self) -> int:
        return self.data.shape[0]


def snap_centers(lm: LandmarkSet, size: int) -> np.ndarray:
    """Nearest-pixel (row, col) centers for each landmark, clipped to the grid."""
    pts = np.asarray(lm.points, dtype=np.float64)
    cols = np.clip(np.rint(pts[:, 0] * size), 0, size - 1).astype(np.int64)
    rows = np.clip(np.rint(pts[:, 1] * size), 0, size - 1).astype(np.int64)
    return np.stack([rows, cols], axis=1)


def render_heatmap(lm: LandmarkSet, size: int = DEFAULT_SIZE,
                   sigma_px: float = DEFAULT_SIGMA_PX) -> HeatmapTensor:
    """Render a landmark set as a max-composited Gaussian heatmap."""
    if size < 8:
        raise ValidationError(f"heatmap size must be >= 8, got {size}")
    if not np.isfinite(sigma_px) or sigma_px <= 0:
        raise ValidationError(f"sigma_px must be a positive real, got {sigma_px}")
    if not np.isfinite(lm.points).all():
        raise ValidationError("landmark coordinates must be finite")
    centers = snap_centers(lm, size)
    data = _kernels.gaussian_max_heatmap(centers, size, float(sigma_px))
    return HeatmapTensor(data=data, sigma_px=float(sigma_px))
