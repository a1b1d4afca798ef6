"""Local binary pattern descriptors: uniform-pattern cell histograms.

Per pixel, an 8-bit code marks which of the 3x3 neighbors (clockwise from
top-left) are >= the center; border neighbors use replication.  Codes with
at most two transitions around the circular byte (58 of the 256) get their
own histogram bin, everything else shares a catch-all, giving 59 bins per
cell.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import _kernels
from ..errors import ValidationError

N_BINS = 59
UNIFORM_CATCH_ALL = 58

# ITU-R 601 luma weights
_LUMA = np.array([0.299, 0.587, 0.114])

_NEIGHBOR_OFFSETS = (
    (-1, -1), (-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1),
)


def circular_transitions(code: int) -> int:
    """Number of 0/1 transitions around the 8-bit circular pattern."""
    bits = [(code >> i) & 1 for i in range(8)]
    return sum(bits[i] != bits[(i + 1) % 8] for i in range(8))


def uniform_bin_map() -> np.ndarray:
    """Map each of the 256 codes to its bin: uniform codes (<= 2 transitions)
    get bins 0..57 in ascending code order, the rest bin 58."""
    mapping = np.full(256, UNIFORM_CATCH_ALL, dtype=np.int64)
    uniform = [c for c in range(256) if circular_transitions(c) <= 2]
    for i, code in enumerate(uniform):
        mapping[code] = i
    return mapping


_BIN_MAP = uniform_bin_map()


def lbp_code(patch) -> int:
    """8-bit code of a single 3x3 patch (bit i: neighbor_i >= center)."""
    arr = np.asarray(patch, dtype=np.float64)
    if arr.shape != (3, 3):
        raise ValidationError(f"expected a 3x3 patch, got shape {arr.shape}")
    center = arr[1, 1]
    code = 0
    for bit, (dy, dx) in enumerate(_NEIGHBOR_OFFSETS):
        if arr[1 + dy, 1 + dx] >= center:
            code |= 1 << bit
    return code


def lbp_code_map(img) -> np.ndarray:
    """Per-pixel LBP codes for a 2-D grayscale image."""
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim != 2:
        raise ValidationError(f"expected a 2-D grayscale image, got shape {arr.shape}")
    return _kernels.lbp_codes(arr)


@dataclass(frozen=True)
class LBPDescriptor:
    """Concatenated per-cell uniform histograms over a (rows, cols) grid."""

    grid: tuple[int, int]
    histogram: np.ndarray

    def __post_init__(self):
        rows, cols = self.grid
        hist = np.asarray(self.histogram, dtype=np.float64)
        if hist.shape != (rows * cols * N_BINS,):
            raise ValidationError(
                f"histogram length {hist.shape} != grid {rows}x{cols} x {N_BINS}")
        hist = hist.copy()
        hist.flags.writeable = False
        object.__setattr__(self, "histogram", hist)


def lbp_descriptor(img, grid: tuple[int, int] = (8, 8)) -> LBPDescriptor:
    """Uniform-LBP cell histogram descriptor of a grayscale image.

    Cells partition the image as evenly as possible; each cell histogram
    sums to the number of pixels in that cell.
    """
    arr = np.asarray(img, dtype=np.float64)
    rows, cols = grid
    if arr.ndim != 2:
        raise ValidationError(f"expected a 2-D grayscale image, got shape {arr.shape}")
    if rows < 1 or cols < 1 or rows > arr.shape[0] or cols > arr.shape[1]:
        raise ValidationError(f"grid {grid} incompatible with image {arr.shape}")
    bins = _BIN_MAP[lbp_code_map(arr)]
    row_edges = np.linspace(0, arr.shape[0], rows + 1).astype(int)
    col_edges = np.linspace(0, arr.shape[1], cols + 1).astype(int)
    hist = np.zeros(rows * cols * N_BINS, dtype=np.float64)
    for r in range(rows):
        for c in range(cols):
            cell = bins[row_edges[r]:row_edges[r + 1], col_edges[c]:col_edges[c + 1]]
            counts = np.bincount(cell.ravel(), minlength=N_BINS)
            hist[(r * cols + c) * N_BINS:(r * cols + c + 1) * N_BINS] = counts
    return LBPDescriptor(grid=grid, histogram=hist)


def to_grayscale(face_chw: np.ndarray) -> np.ndarray:
    """RGB [-1, 1] CHW image to a [0, 1] grayscale map via ITU-R 601 luma."""
    arr = np.asarray(face_chw, dtype=np.float64)
    if arr.ndim != 3 or arr.shape[0] != 3:
        raise ValidationError(f"expected a 3xHxW image, got shape {arr.shape}")
    rgb01 = (arr + 1.0) * 0.5
    return np.tensordot(_LUMA, rgb01, axes=(0, 0))
