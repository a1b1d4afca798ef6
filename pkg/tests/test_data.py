import json
import os

import numpy as np
import pytest
from PIL import Image

from lm2face.data import (
    crop_and_normalize,
    crop_to_pixel,
    load_manifest,
    make_pairs,
    write_manifest,
)
from lm2face.errors import ValidationError
from lm2face.fixtures import FixtureSpec, generate_corpus, generate_pairs, render_face, sample_landmarks
from lm2face.landmarks import validate


def checker_image(size=64):
    img = np.zeros((size, size, 3), dtype=np.uint8)
    img[::2, ::2] = 200
    img[1::2, 1::2] = 120
    return img


def test_crop_identity_case():
    img = checker_image(64)
    pts = np.array([[32.0, 32.0]] * 68)
    result = crop_and_normalize(img, pts, (0, 0, 64, 64))
    assert np.array_equal(result.face.to_uint8(), img)
    assert result.landmarks.points[0, 0] == pytest.approx(0.5)
    assert result.landmarks.points[0, 1] == pytest.approx(0.5)
    assert result.clamped_indices == ()


def test_crop_left_half_maps_center_to_edge():
    img = checker_image(64)
    pts = np.array([[32.0, 16.0]] * 68)
    result = crop_and_normalize(img, pts, (0, 0, 32, 64))
    assert result.landmarks.points[0, 0] == pytest.approx(1.0)


def test_crop_flags_outside_landmarks():
    img = checker_image(64)
    pts = np.array([[10.0, 10.0]] * 68)
    pts[5] = (60.0, 60.0)  # outside the left-half crop
    result = crop_and_normalize(img, pts, (0, 0, 32, 64))
    assert 5 in result.clamped_indices
    assert result.landmarks.points[5, 0] == 1.0


def test_crop_round_trip_within_half_pixel(rng):
    img = checker_image(64)
    bbox = (7, 4, 41, 53)
    pts = np.column_stack([rng.uniform(8, 47, 68), rng.uniform(5, 56, 68)])
    result = crop_and_normalize(img, pts, bbox)
    for i in range(68):
        x, y = crop_to_pixel(result.landmarks.points[i], bbox)
        assert abs(x - pts[i, 0]) < 0.5
        assert abs(y - pts[i, 1]) < 0.5


def test_crop_zero_area_bbox_rejected():
    with pytest.raises(ValidationError):
        crop_and_normalize(checker_image(), np.zeros((68, 2)), (10, 10, 0, 5))
    with pytest.raises(ValidationError):
        crop_and_normalize(checker_image(), np.zeros((68, 2)), (100, 100, 20, 20))


def _write_corpus(tmp_path, n=10):
    return generate_corpus(tmp_path, FixtureSpec(n_train=n, n_test=0, seed=1))


def test_manifest_load_and_pairs(tmp_path):
    manifest = _write_corpus(tmp_path, 10)
    assert len(manifest.split_records("train")) == 10
    assert manifest.source == "lm2face-fixtures"
    pairs, skipped = make_pairs(manifest, "train", seed=3)
    assert len(pairs) == 10 and skipped == 0
    heat, face, gender = pairs[0]
    assert heat.data.shape == (64, 64)
    assert face.data.shape == (3, 64, 64)
    assert gender in ("M", "F")


def test_make_pairs_deterministic_order(tmp_path):
    manifest = _write_corpus(tmp_path, 10)
    a, _ = make_pairs(manifest, "train", seed=3)
    b, _ = make_pairs(manifest, "train", seed=3)
    c, _ = make_pairs(manifest, "train", seed=4)
    assert all(x.data.tobytes() == y.data.tobytes() for (_, x, _), (_, y, _) in zip(a, b))
    assert any(x.data.tobytes() != y.data.tobytes() for (_, x, _), (_, y, _) in zip(a, c))


def test_corrupt_record_skipped_with_warning(tmp_path, caplog):
    manifest = _write_corpus(tmp_path, 10)
    bad = manifest.records[0].image_path()
    with open(bad, "wb") as fh:
        fh.write(b"not a png")
    pairs, skipped = make_pairs(load_manifest(manifest.path), "train", seed=0)
    assert len(pairs) == 9 and skipped == 1


def test_too_many_corrupt_records_fails(tmp_path):
    manifest = _write_corpus(tmp_path, 10)
    for record in manifest.records[:2]:
        with open(record.image_path(), "wb") as fh:
            fh.write(b"junk")
    with pytest.raises(ValidationError, match="skipped"):
        make_pairs(load_manifest(manifest.path), "train", seed=0)


def test_manifest_rejects_split_collisions_and_bad_gender(tmp_path):
    path = tmp_path / "m.jsonl"
    records = [
        {"image": "a.png", "landmarks": "a.json", "gender": "M", "split": "train"},
        {"image": "a.png", "landmarks": "a.json", "gender": "M", "split": "test"},
    ]
    write_manifest(path, records)
    with pytest.raises(ValidationError, match="splits"):
        load_manifest(path)
    write_manifest(path, [{"image": "a.png", "landmarks": "a.json", "gender": "X",
                           "split": "train"}])
    with pytest.raises(ValidationError, match="gender"):
        load_manifest(path)
    (tmp_path / "bad.jsonl").write_text("{not json}\n")
    with pytest.raises(ValidationError, match="JSON"):
        load_manifest(tmp_path / "bad.jsonl")


def test_heatmap_peaks_align_with_landmarks(tmp_path):
    pairs = generate_pairs(4, seed=2)
    for heat, _, _ in pairs:
        assert heat.data.max() == 1.0


def test_emitted_pairs_satisfy_type_invariants():
    for heat, face, _ in generate_pairs(6, seed=8):
        assert 0.0 <= heat.data.min() and heat.data.max() <= 1.0
        assert -1.0 <= face.data.min() and face.data.max() <= 1.0


def test_fixture_landmarks_valid_and_images_sized(tmp_path, rng):
    for gender in ("M", "F"):
        for _ in range(5):
            lm = sample_landmarks(rng, gender)
            assert validate(lm).valid
            img = render_face(lm, gender)
            assert img.shape == (64, 64, 3) and img.dtype == np.uint8


def test_fixture_corpus_on_disk(tmp_path):
    manifest = generate_corpus(tmp_path, FixtureSpec(n_train=6, n_test=4, seed=5))
    assert len(manifest.split_records("train")) == 6
    assert len(manifest.split_records("test")) == 4
    record = manifest.records[0]
    with Image.open(record.image_path()) as img:
        assert img.size == (64, 64)
    assert validate(record.load_landmarks()).valid
    genders = [r.gender for r in manifest.records]
    assert genders.count("M") == 5 and genders.count("F") == 5
