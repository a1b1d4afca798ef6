"""Face image tensor type and PNG conversion helpers."""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np
from PIL import Image

from .errors import ValidationError

IMAGE_SIZE = 64
CHANNELS = 3


@dataclass(frozen=True)
class FaceImage:
    """3x64x64 RGB image with values in [-1, 1]."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float32)
        if arr.shape != (CHANNELS, IMAGE_SIZE, IMAGE_SIZE):
            raise ValidationError(
                f"face image must be {CHANNELS}x{IMAGE_SIZE}x{IMAGE_SIZE}, got {arr.shape}"
            )
        if not np.isfinite(arr).all():
            raise ValidationError("face image values must be finite")
        if arr.min() < -1.0 or arr.max() > 1.0:
            raise ValidationError("face image values must lie in [-1, 1]")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    def to_uint8(self) -> np.ndarray:
        """HxWx3 uint8 view for display / encoding."""
        hwc = np.transpose(self.data, (1, 2, 0))
        return np.clip((hwc + 1.0) * 127.5, 0.0, 255.0).round().astype(np.uint8)

    def to_png_bytes(self) -> bytes:
        buf = io.BytesIO()
        Image.fromarray(self.to_uint8(), mode="RGB").save(buf, format="PNG")
        return buf.getvalue()

    @classmethod
    def from_uint8(cls, rgb: np.ndarray) -> "FaceImage":
        """From an HxWx3 uint8 array; values map to [-1, 1] via x / 127.5 - 1."""
        arr = np.asarray(rgb)
        if arr.ndim != 3 or arr.shape[2] != CHANNELS:
            raise ValidationError(f"expected HxWx3 uint8 image, got shape {arr.shape}")
        chw = np.transpose(arr.astype(np.float32) / 127.5 - 1.0, (2, 0, 1))
        return cls(data=np.clip(chw, -1.0, 1.0))
