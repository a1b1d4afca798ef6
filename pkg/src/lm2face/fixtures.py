"""Procedural landmark+face fixture corpus.

Every test and desk-scale run uses this generator instead of a downloaded
dataset.  Faces are drawn from their landmarks so the landmark-to-image
mapping is learnable; gender shows up in two places:

  * geometry: moderate, noisy shifts (jaw width, brow height, mouth width)
    plus gender-neutral nuisance modes (expression, pose jitter), so
    landmark-only classification is informative but imperfect;
  * appearance: bold fixed-phase textures (striped hair block and stubble
    band for males, smooth hair and lower face for females), which are
    texture features an LBP descriptor picks up reliably.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np
from PIL import Image

from .data import DatasetManifest, load_manifest, write_manifest
from .heatmap import DEFAULT_SIGMA_PX, render_heatmap
from .images import FaceImage
from .landmarks import (
    BROWS,
    JAW,
    LEFT_EYE,
    MOUTH,
    MOUTH_INNER_BOTTOM,
    MOUTH_INNER_TOP,
    RIGHT_EYE,
    LandmarkSet,
    template,
)

SIZE = 64


@dataclass(frozen=True)
class FixtureSpec:
    n_train: int = 200
    n_test: int = 100
    seed: int = 0
    sigma_px: float = DEFAULT_SIGMA_PX


def sample_landmarks(rng: np.random.Generator, gender: str) -> LandmarkSet:
    """Gendered landmark geometry with overlapping class distributions.

    Monotone shape cues (jaw, brows, mouth width) carry a moderate, noisy
    gender signal.  A gendered head tilt adds a strong cue that pairwise
    distances cannot see at all (rotation invariance) but that the heatmap,
    and hence the generator, sees directly.
    """
    g = 1.0 if gender == "M" else -1.0
    pts = template("frontal").points.copy()

    jaw = list(JAW)
    brows = list(BROWS)
    mouth = list(MOUTH)

    # monotone shape cues, each overlapping the nuisance noise
    jaw_factor = 1.0 + 0.022 * g + rng.normal(0.0, 0.025)
    pts[jaw, 0] = 0.5 + (pts[jaw, 0] - 0.5) * jaw_factor
    pts[brows, 1] += -0.006 * g + rng.normal(0.0, 0.008)
    mouth_cx = pts[mouth, 0].mean()
    mouth_factor = 1.0 + 0.02 * g + rng.normal(0.0, 0.028)
    pts[mouth, 0] = mouth_cx + (pts[mouth, 0] - mouth_cx) * mouth_factor

    # gender-neutral nuisance modes
    openness = abs(rng.normal(0.0, 0.012))
    pts[list(MOUTH_INNER_BOTTOM), 1] += openness
    pts[(55, 56, 57, 58, 59), 1] += openness
    pts[brows, 1] += rng.normal(0.0, 0.006)          # expression
    pts += rng.normal(0.0, 0.006, size=pts.shape)    # per-point jitter

    # gendered head tilt: invisible to pairwise distances
    theta = np.deg2rad(5.0 * g + rng.normal(0.0, 1.5))
    center = pts.mean(axis=0)
    rot = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
    pts = center + (pts - center) @ rot.T

    pts += rng.normal(0.0, 0.008, size=(1, 2))       # translation
    pts = 0.5 + (pts - 0.5) * rng.normal(1.0, 0.02)  # overall scale

    return LandmarkSet(points=np.clip(pts, 0.02, 0.98))


def _disk(img, cx, cy, r, value):
    y, x = np.ogrid[:SIZE, :SIZE]
    mask = (x - cx) ** 2 + (y - cy) ** 2 <= r * r
    img[mask] = value


def render_face(lm: LandmarkSet, gender: str) -> np.ndarray:
    """Draw a 64x64 uint8 face for a landmark set (deterministic)."""
    px = np.clip(lm.points * SIZE, 0, SIZE - 1)
    img = np.zeros((SIZE, SIZE), dtype=np.float64)

    # background gradient and face disc
    img[:] = 205.0 - 20.0 * (np.arange(SIZE) / SIZE)[:, None]
    cx, cy = px[:, 0].mean(), px[:, 1].mean()
    jaw_half = (px[16, 0] - px[0, 0]) / 2.0
    face_w = max(jaw_half, 10.0)
    y, x = np.ogrid[:SIZE, :SIZE]
    face_mask = ((x - cx) / face_w) ** 2 + ((y - cy) / (face_w * 1.25)) ** 2 <= 1.0
    img[face_mask] = 175.0

    # hair block above the brows
    brow_y = int(px[list(BROWS), 1].mean())
    hair_top = max(1, brow_y - 14)
    hair = np.zeros_like(img, dtype=bool)
    hair[hair_top:brow_y - 3, int(cx - face_w):int(cx + face_w) + 1] = True
    hair &= face_mask | (y < cy)
    if gender == "M":
        # striped texture: alternating bright columns
        stripes = (np.arange(SIZE) % 2 == 0)[None, :]
        img[hair] = np.where(np.broadcast_to(stripes, img.shape)[hair], 60.0, 150.0)
    else:
        img[hair] = 70.0
        # side hair falling past the jaw
        side = np.zeros_like(hair)
        w = max(int(face_w * 0.28), 2)
        side[hair_top:int(cy + face_w), int(cx - face_w) - w:int(cx - face_w) + 2] = True
        side[hair_top:int(cy + face_w), int(cx + face_w) - 1:int(cx + face_w) + w + 1] = True
        img[side] = 70.0

    # jaw outline
    for i in range(16):
        x0, y0 = px[i]
        x1, y1 = px[i + 1]
        for t in np.linspace(0.0, 1.0, 8):
            xi = int(round(x0 + (x1 - x0) * t))
            yi = int(round(y0 + (y1 - y0) * t))
            img[max(0, min(yi, SIZE - 1)), max(0, min(xi, SIZE - 1))] = 110.0

    # brows, eyes, nose, mouth drawn from their landmarks
    for i in BROWS:
        img[int(px[i, 1]), int(px[i, 0])] = 90.0
    for group in (LEFT_EYE, RIGHT_EYE):
        ex, ey = px[list(group), 0].mean(), px[list(group), 1].mean()
        _disk(img, ex, ey, 1.6, 50.0)
    for i in (27, 28, 29, 30):
        img[int(px[i, 1]), int(px[i, 0])] = 140.0
    mouth_x, mouth_y = px[list(MOUTH), 0].mean(), px[list(MOUTH), 1].mean()
    mouth_w = (px[54, 0] - px[48, 0]) / 2.0
    mouth_gap_px = abs(px[list(MOUTH_INNER_TOP), 1].mean()
                       - px[list(MOUTH_INNER_BOTTOM), 1].mean())
    mouth_h = max(1.5, mouth_gap_px + 1.5)
    mouth_mask = (((x - mouth_x) / max(mouth_w, 2.0)) ** 2
                  + ((y - mouth_y) / mouth_h) ** 2) <= 1.0
    img[mouth_mask] = 120.0 if gender == "M" else 95.0

    if gender == "M":
        # stubble band between mouth and chin: alternating rows + checker
        chin_y = int(px[8, 1])
        band = np.zeros_like(img, dtype=bool)
        band[int(mouth_y) + 3:min(chin_y + 2, SIZE), :] = True
        band &= face_mask & ~mouth_mask
        rows = (np.arange(SIZE) % 2 == 0)[:, None]
        checker = ((x + y) % 2 == 0)
        img[band & np.broadcast_to(rows, img.shape)] -= 55.0
        img[band & checker] -= 25.0

    rgb = np.repeat(np.clip(img, 0, 255)[:, :, None], 3, axis=2)
    # mild channel tint so images are not pure gray
    rgb[:, :, 0] = np.clip(rgb[:, :, 0] * 1.05, 0, 255)
    rgb[:, :, 2] = np.clip(rgb[:, :, 2] * 0.95, 0, 255)
    return rgb.astype(np.uint8)


def generate_pairs(n: int, seed: int = 0, sigma_px: float = DEFAULT_SIGMA_PX):
    """In-memory (HeatmapTensor, FaceImage, gender) triples, gender-balanced."""
    rng = np.random.Generator(np.random.PCG64(seed))
    pairs = []
    for i in range(n):
        gender = "M" if i % 2 == 0 else "F"
        lm = sample_landmarks(rng, gender)
        face = FaceImage.from_uint8(render_face(lm, gender))
        heat = render_heatmap(lm, size=SIZE, sigma_px=sigma_px)
        pairs.append((heat, face, gender))
    return pairs


def generate_corpus(out_dir, spec: FixtureSpec | None = None) -> DatasetManifest:
    """Write a PNG+JSON fixture corpus with train/test splits and a manifest."""
    spec = spec or FixtureSpec()
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    os.makedirs(os.path.join(out_dir, "faces"), exist_ok=True)
    records = []
    total = spec.n_train + spec.n_test
    for i in range(total):
        split = "train" if i < spec.n_train else "test"
        gender = "M" if i % 2 == 0 else "F"
        lm = sample_landmarks(rng, gender)
        rgb = render_face(lm, gender)
        stem = f"faces/{split}_{i:05d}"
        Image.fromarray(rgb).save(os.path.join(out_dir, f"{stem}.png"))
        with open(os.path.join(out_dir, f"{stem}.json"), "w") as fh:
            fh.write(lm.to_json())
        records.append({
            "image": f"{stem}.png",
            "landmarks": f"{stem}.json",
            "gender": gender,
            "split": split,
        })
    manifest_path = os.path.join(out_dir, "manifest.jsonl")
    write_manifest(manifest_path, records, source="lm2face-fixtures", preprocessing="v1")
    return load_manifest(manifest_path)
