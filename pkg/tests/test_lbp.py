import numpy as np
import pytest

from lm2face import _kernels
from lm2face._kernels import slow
from lm2face.errors import ValidationError
from lm2face.evaluation.lbp import (
    N_BINS,
    UNIFORM_CATCH_ALL,
    circular_transitions,
    lbp_code,
    lbp_code_map,
    lbp_descriptor,
    to_grayscale,
    uniform_bin_map,
)


def oracle_descriptor(img, grid):
    """Brute force: per-pixel lbp_code over replicate-padded patches, then
    per-cell histograms through the same uniform bin map."""
    arr = np.asarray(img, dtype=np.float64)
    padded = np.pad(arr, 1, mode="edge")
    h, w = arr.shape
    codes = np.zeros((h, w), dtype=int)
    for i in range(h):
        for j in range(w):
            codes[i, j] = lbp_code(padded[i:i + 3, j:j + 3])
    mapping = uniform_bin_map()
    rows, cols = grid
    row_edges = np.linspace(0, h, rows + 1).astype(int)
    col_edges = np.linspace(0, w, cols + 1).astype(int)
    hist = []
    for r in range(rows):
        for c in range(cols):
            cell = codes[row_edges[r]:row_edges[r + 1], col_edges[c]:col_edges[c + 1]]
            counts = np.zeros(N_BINS)
            for code in cell.ravel():
                counts[mapping[code]] += 1
            hist.append(counts)
    return np.concatenate(hist)


def test_lbp_code_all_equal_patch():
    assert lbp_code(np.full((3, 3), 7.0)) == 255


def test_lbp_code_manual_example():
    # clockwise from top-left: 6, 1, 1, 1, 1, 1, 1, 6 around center 5
    patch = np.array([
        [6.0, 1.0, 1.0],
        [6.0, 5.0, 1.0],
        [1.0, 1.0, 1.0],
    ])
    assert lbp_code(patch) == 129


def test_lbp_code_gray_shift_invariance(rng):
    patch = rng.random((3, 3)) * 50
    assert lbp_code(patch) == lbp_code(patch + 10.0)


def test_lbp_code_validates_shape():
    with pytest.raises(ValidationError):
        lbp_code(np.zeros((4, 4)))


def test_uniform_census_is_58():
    uniform = [c for c in range(256) if circular_transitions(c) <= 2]
    assert len(uniform) == 58
    mapping = uniform_bin_map()
    assert sorted(set(mapping[uniform])) == list(range(58))
    non_uniform = [c for c in range(256) if circular_transitions(c) > 2]
    assert (mapping[non_uniform] == UNIFORM_CATCH_ALL).all()


def test_constant_image_all_mass_in_all_ones_bin():
    desc = lbp_descriptor(np.full((64, 64), 0.5), grid=(8, 8))
    mapping = uniform_bin_map()
    bin255 = mapping[255]
    cells = desc.histogram.reshape(64, N_BINS)
    assert (cells[:, bin255] == 64).all()
    assert cells.sum() == 64 * 64


def test_cell_histograms_sum_to_pixel_counts(rng):
    img = rng.random((64, 64))
    desc = lbp_descriptor(img, grid=(8, 8))
    cells = desc.histogram.reshape(64, N_BINS)
    assert (cells.sum(axis=1) == 64).all()
    # uneven grid still covers every pixel exactly once
    desc2 = lbp_descriptor(rng.random((10, 10)), grid=(3, 3))
    assert desc2.histogram.sum() == 100


def test_descriptor_matches_brute_force_oracle(rng):
    for _ in range(20):
        img = rng.random((16, 16))
        ours = lbp_descriptor(img, grid=(4, 4)).histogram
        assert np.array_equal(ours, oracle_descriptor(img, (4, 4)))


def test_code_map_backends_agree(rng):
    img = rng.random((32, 32))
    reference = slow.lbp_codes(img)
    assert np.array_equal(_kernels.lbp_codes(img), reference)
    try:
        from lm2face._kernels import _fast
    except ImportError:
        pytest.skip("compiled extension not built")
    assert np.array_equal(_fast.lbp_codes(img), reference)


def test_code_map_validates_shape():
    with pytest.raises(ValidationError):
        lbp_code_map(np.zeros((3, 3, 3)))


def test_grayscale_luma():
    img = np.zeros((3, 4, 4), dtype=np.float32)
    img[0] = 1.0   # pure red in [-1, 1] space
    img[1] = -1.0
    img[2] = -1.0
    gray = to_grayscale(img)
    assert gray.shape == (4, 4)
    assert gray[0, 0] == pytest.approx(0.299, abs=1e-6)
    with pytest.raises(ValidationError):
        to_grayscale(np.zeros((4, 4)))
