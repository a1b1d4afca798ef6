"""Dataset ingestion: JSON-lines manifests, face cropping/normalization and
training-pair assembly.

Manifest records are one JSON object per line:

    {"image": "faces/001.png", "landmarks": "faces/001.json" | {...inline...},
     "gender": "M", "split": "train"}

An optional line with a "meta" key carries provenance (source dataset name,
preprocessing version).  Relative paths resolve against the manifest's
directory.
"""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass

import numpy as np
from PIL import Image

from .errors import ValidationError
from .heatmap import DEFAULT_SIGMA_PX, render_heatmap
from .images import IMAGE_SIZE, FaceImage
from .landmarks import LandmarkSet

log = logging.getLogger(__name__)

GENDERS = ("M", "F")
MAX_SKIP_FRACTION = 0.10


@dataclass(frozen=True)
class ManifestRecord:
    image: str
    landmarks: str | list | dict
    gender: str
    split: str = "train"
    base_dir: str = "."

    def image_path(self) -> str:
        return os.path.join(self.base_dir, self.image)

    def load_landmarks(self) -> LandmarkSet:
        if isinstance(self.landmarks, str):
            path = os.path.join(self.base_dir, self.landmarks)
            with open(path) as fh:
                return LandmarkSet.from_json(fh.read())
        if isinstance(self.landmarks, dict):
            return LandmarkSet(points=self.landmarks["points"],
                               schema_id=self.landmarks.get("schema", "ibug68"))
        return LandmarkSet(points=self.landmarks)

    def load_image(self) -> FaceImage:
        with Image.open(self.image_path()) as img:
            rgb = img.convert("RGB")
            if rgb.size != (IMAGE_SIZE, IMAGE_SIZE):
                rgb = rgb.resize((IMAGE_SIZE, IMAGE_SIZE), Image.BILINEAR)
            return FaceImage.from_uint8(np.asarray(rgb))


@dataclass(frozen=True)
class DatasetManifest:
    records: tuple[ManifestRecord, ...]
    source: str = "unknown"
    preprocessing: str = "v1"
    path: str | None = None

    def split_records(self, split: str) -> list[ManifestRecord]:
        return [r for r in self.records if r.split == split]

    def __len__(self) -> int:
        return len(self.records)


def load_manifest(path) -> DatasetManifest:
    """Parse a JSON-lines manifest and validate its structural invariants."""
    base_dir = os.path.dirname(os.path.abspath(path))
    records = []
    source = "unknown"
    preprocessing = "v1"
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ValidationError(f"cannot read manifest {path}: {exc}") from exc

    for lineno, line in enumerate(lines, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}:{lineno}: malformed JSON: {exc}") from exc
        if "meta" in obj:
            source = obj["meta"].get("source", source)
            preprocessing = obj["meta"].get("preprocessing", preprocessing)
            continue
        for key in ("image", "landmarks", "gender"):
            if key not in obj:
                raise ValidationError(f"{path}:{lineno}: record missing {key!r}")
        if obj["gender"] not in GENDERS:
            raise ValidationError(f"{path}:{lineno}: gender must be one of {GENDERS}")
        records.append(ManifestRecord(
            image=obj["image"],
            landmarks=obj["landmarks"],
            gender=obj["gender"],
            split=obj.get("split", "train"),
            base_dir=base_dir,
        ))

    seen: dict[str, str] = {}
    for r in records:
        prior = seen.get(r.image)
        if prior is not None and prior != r.split:
            raise ValidationError(f"record {r.image} appears in splits {prior} and {r.split}")
        seen[r.image] = r.split
    return DatasetManifest(records=tuple(records), source=source,
                           preprocessing=preprocessing, path=str(path))


def write_manifest(path, records, source: str = "unknown", preprocessing: str = "v1") -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w") as fh:
        fh.write(json.dumps({"meta": {"source": source, "preprocessing": preprocessing}}) + "\n")
        for r in records:
            fh.write(json.dumps({
                "image": r["image"] if isinstance(r, dict) else r.image,
                "landmarks": r["landmarks"] if isinstance(r, dict) else r.landmarks,
                "gender": r["gender"] if isinstance(r, dict) else r.gender,
                "split": r["split"] if isinstance(r, dict) else r.split,
            }) + "\n")
    os.replace(tmp, path)


@dataclass(frozen=True)
class CropResult:
    face: FaceImage
    landmarks: LandmarkSet
    clamped_indices: tuple[int, ...]


def crop_and_normalize(image: np.ndarray, landmarks_px: np.ndarray, bbox) -> CropResult:
    """Crop a face box out of an image and normalize both signal domains.

    image: HxWx3 uint8; landmarks_px: 68x2 absolute pixel coordinates;
    bbox: (x0, y0, width, height) in pixels, clamped to the image.  The crop
    is resized to 64x64 with bilinear resampling, pixel values map to
    [-1, 1], and landmarks transform into crop-normalized [0, 1] coordinates
    (out-of-crop points are clamped and their indices reported).
    """
    arr = np.asarray(image)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValidationError(f"expected an HxWx3 image, got shape {arr.shape}")
    h, w = arr.shape[:2]
    x0, y0, bw, bh = bbox
    x0 = int(max(0, min(x0, w)))
    y0 = int(max(0, min(y0, h)))
    x1 = int(max(0, min(x0 + bw, w)))
    y1 = int(max(0, min(y0 + bh, h)))
    if x1 <= x0 or y1 <= y0:
        raise ValidationError(f"bbox {bbox} has zero area after clamping to {w}x{h}")

    crop = Image.fromarray(arr[y0:y1, x0:x1]).resize((IMAGE_SIZE, IMAGE_SIZE), Image.BILINEAR)
    face = FaceImage.from_uint8(np.asarray(crop))

    pts = np.asarray(landmarks_px, dtype=np.float64)
    norm = np.empty_like(pts)
    norm[:, 0] = (pts[:, 0] - x0) / (x1 - x0)
    norm[:, 1] = (pts[:, 1] - y0) / (y1 - y0)
    outside = (norm < 0.0) | (norm > 1.0)
    clamped = tuple(int(i) for i in np.nonzero(outside.any(axis=1))[0])
    return CropResult(face=face,
                      landmarks=LandmarkSet(points=np.clip(norm, 0.0, 1.0)),
                      clamped_indices=clamped)


def crop_to_pixel(norm_xy, bbox) -> tuple[float, float]:
    """Inverse of the crop's landmark transform (for round-trip checks)."""
    x0, y0, bw, bh = bbox
    return (x0 + norm_xy[0] * bw, y0 + norm_xy[1] * bh)


def make_pairs(manifest: DatasetManifest, split: str = "train",
               sigma_px: float = DEFAULT_SIGMA_PX, seed: int = 0,
               heatmap_size: int = IMAGE_SIZE):
    """Materialize (HeatmapTensor, FaceImage, gender) triples for a split.

    Iteration order is a seeded permutation.  Unreadable records are skipped
    with a warning; more than 10% skipped is a hard failure.
    """
    records = manifest.split_records(split)
    order = np.random.Generator(np.random.PCG64(seed)).permutation(len(records))
    pairs = []
    skipped = 0
    for i in order:
        record = records[int(i)]
        try:
            lm = record.load_landmarks()
            face = record.load_image()
        except Exception as exc:
            skipped += 1
            log.warning("skipping record %s: %s", record.image, exc)
            continue
        heat = render_heatmap(lm, size=heatmap_size, sigma_px=sigma_px)
        pairs.append((heat, face, record.gender))
    if records and skipped / len(records) > MAX_SKIP_FRACTION:
        raise ValidationError(
            f"{skipped}/{len(records)} records skipped (> {MAX_SKIP_FRACTION:.0%})")
    return pairs, skipped


def load_pair_arrays(records) -> tuple[list[FaceImage], list[LandmarkSet]]:
    faces = [r.load_image() for r in records]
    lms = [r.load_landmarks() for r in records]
    return faces, lms
