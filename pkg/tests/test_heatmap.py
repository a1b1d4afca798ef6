import math

import numpy as np
import pytest

from lm2face import _kernels
from lm2face._kernels import slow
from lm2face.errors import ValidationError
from lm2face.heatmap import HeatmapTensor, render_heatmap, sigma_from_mode, snap_centers
from lm2face.landmarks import LandmarkSet, template


def oracle_render(lm, size, sigma):
    """Independent brute force: direct double loop over pixels and landmarks
    with the raw exp(-(dy^2 + dx^2) / (2 s^2)) formula at snapped centers."""
    centers = snap_centers(lm, size)
    out = np.zeros((size, size))
    for i in range(size):
        for j in range(size):
            best = 0.0
            for cy, cx in centers:
                v = math.exp(-((i - cy) ** 2 + (j - cx) ** 2) / (2.0 * sigma * sigma))
                best = max(best, v)
            out[i, j] = best
    return out


def single_point_set(x, y):
    pts = np.full((68, 2), (x, y))
    return LandmarkSet(points=pts)


def test_peak_location_and_falloff():
    heat = render_heatmap(single_point_set(0.5, 0.5), size=64, sigma_px=2.0)
    assert heat.data[32, 32] == 1.0
    assert heat.data[33, 32] == pytest.approx(math.exp(-1 / 8), abs=1e-12)
    assert heat.data[32, 33] == pytest.approx(math.exp(-1 / 8), abs=1e-12)
    assert heat.data.max() == 1.0


def test_coincident_landmarks_idempotent():
    one = render_heatmap(single_point_set(0.3, 0.7), size=64, sigma_px=2.0)
    pts = np.full((68, 2), (0.3, 0.7))
    pts[:34] = (0.3, 0.7)  # all identical anyway; max not sum
    many = render_heatmap(LandmarkSet(points=pts), size=64, sigma_px=2.0)
    assert np.array_equal(one.data, many.data)


def test_full_template_bounded_with_67_plus_peaks():
    lm = template("frontal")
    heat = render_heatmap(lm, size=64, sigma_px=2.0)
    assert heat.data.max() <= 1.0
    # brute-force scan: exact-peak pixels, each a local max under >= convention
    peaks = np.argwhere(heat.data == 1.0)
    assert len(peaks) >= 67
    padded = np.pad(heat.data, 1, mode="constant")
    for y, x in peaks:
        window = padded[y:y + 3, x:x + 3]
        assert (heat.data[y, x] >= window).all()


def test_matches_brute_force_oracle(rng):
    for _ in range(3):
        pts = rng.uniform(0.05, 0.95, size=(68, 2))
        lm = LandmarkSet(points=pts)
        heat = render_heatmap(lm, size=32, sigma_px=1.7)
        assert np.abs(heat.data - oracle_render(lm, 32, 1.7)).max() < 1e-12


def test_ordering_invariance(rng):
    pts = rng.uniform(0.05, 0.95, size=(68, 2))
    perm = rng.permutation(68)
    a = render_heatmap(LandmarkSet(points=pts), size=64, sigma_px=2.0)
    b = render_heatmap(LandmarkSet(points=pts[perm]), size=64, sigma_px=2.0)
    assert np.array_equal(a.data, b.data)


def test_translation_covariance():
    lm = template("frontal")
    k = 3
    shifted = LandmarkSet(points=lm.points + k / 64.0)
    a = render_heatmap(lm, size=64, sigma_px=2.0)
    b = render_heatmap(shifted, size=64, sigma_px=2.0)
    # interior comparison away from borders
    assert np.array_equal(a.data[8:-8 - k, 8:-8 - k], b.data[8 + k:-8, 8 + k:-8])


def test_sigma_and_size_validation():
    lm = template("frontal")
    with pytest.raises(ValidationError):
        render_heatmap(lm, size=64, sigma_px=0.0)
    with pytest.raises(ValidationError):
        render_heatmap(lm, size=64, sigma_px=-1.0)
    with pytest.raises(ValidationError):
        render_heatmap(lm, size=7, sigma_px=2.0)


def test_heatmap_tensor_range_validation():
    with pytest.raises(ValidationError):
        HeatmapTensor(data=np.full((16, 16), 1.5), sigma_px=2.0)
    with pytest.raises(ValidationError):
        HeatmapTensor(data=np.zeros((16, 8)), sigma_px=2.0)


def test_sigma_modes():
    assert sigma_from_mode("default") == 2.0
    assert sigma_from_mode("literal-px") == 0.2
    assert sigma_from_mode("normalized", size=64) == pytest.approx(12.8)
    with pytest.raises(ValidationError):
        sigma_from_mode("bogus")


def test_max_is_one_whenever_landmarks_present(rng):
    for _ in range(5):
        pts = rng.uniform(0.0, 1.0, size=(68, 2))
        heat = render_heatmap(LandmarkSet(points=pts), size=64, sigma_px=2.0)
        assert heat.data.max() == 1.0


def test_kernel_backends_agree(rng):
    pts = rng.uniform(0.0, 1.0, size=(68, 2))
    centers = snap_centers(LandmarkSet(points=pts), 64)
    reference = slow.gaussian_max_heatmap(centers, 64, 2.0)
    active = _kernels.gaussian_max_heatmap(centers, 64, 2.0)
    assert np.abs(reference - active).max() < 1e-12
    try:
        from lm2face._kernels import _fast
    except ImportError:
        pytest.skip("compiled extension not built")
    assert np.abs(_fast.gaussian_max_heatmap(centers, 64, 2.0) - reference).max() < 1e-12
