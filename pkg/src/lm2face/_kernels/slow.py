"""Pure-numpy kernels. Fallback used when the compiled extension is absent.

Both implementations must agree: the heatmap kernels to <1e-12 (same double
formula, max composition), the LBP kernel bit-for-bit (integer codes).
"""

import numpy as np

IMPLEMENTATION = "numpy"


def gaussian_max_heatmap(centers, size, sigma):
    """Max-composite of unit-peak Gaussian bumps at integer pixel centers.

    centers: (K, 2) int array of (row, col) pixel positions, already snapped
    and clipped to the grid.  Returns a (size, size) float64 map in [0, 1].
    Each bump is built from separable 1-D tables (exp(-(dy^2+dx^2)/2s^2) =
    exp(-dy^2/2s^2) * exp(-dx^2/2s^2)).
    """
    centers = np.asarray(centers, dtype=np.int64)
    out = np.zeros((size, size), dtype=np.float64)
    if len(centers) == 0:
        return out
    coords = np.arange(size, dtype=np.float64)
    inv = 1.0 / (2.0 * float(sigma) * float(sigma))
    for cy, cx in centers:
        row_tab = np.exp(-((coords - float(cy)) ** 2) * inv)
        col_tab = np.exp(-((coords - float(cx)) ** 2) * inv)
        np.maximum(out, row_tab[:, None] * col_tab[None, :], out=out)
    return out


_NEIGHBOR_OFFSETS = (  # clockwise from top-left; bit i of the code
    (-1, -1), (-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1),
)


def lbp_codes(img):
    """8-bit local binary pattern code per pixel, borders by replication.

    Bit i is set iff the i-th neighbor (clockwise from top-left) is >= the
    center pixel.
    """
    img = np.asarray(img, dtype=np.float64)
    padded = np.pad(img, 1, mode="edge")
    h, w = img.shape
    codes = np.zeros((h, w), dtype=np.uint8)
    for bit, (dy, dx) in enumerate(_NEIGHBOR_OFFSETS):
        neighbor = padded[1 + dy : 1 + dy + h, 1 + dx : 1 + dx + w]
        codes |= (neighbor >= img).astype(np.uint8) << bit
    return codes
