"""68-point facial landmark sets: data model, manipulation and validation.

Coordinates are stored normalized to [0, 1] relative to the face crop, so
rendering resolution stays a free parameter.  Point semantics follow the
standard 68-point annotation convention:

    jaw 0-16, brows 17-26, nose 27-35, eyes 36-47, mouth 48-67
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError

N_POINTS = 68
SCHEMA_ID = "ibug68"

# semantic index groups of the 68-point convention
JAW = range(0, 17)
BROWS = range(17, 27)
NOSE = range(27, 36)
LEFT_EYE = range(36, 42)
RIGHT_EYE = range(42, 48)
MOUTH = range(48, 68)
MOUTH_INNER_TOP = (61, 62, 63)
MOUTH_INNER_BOTTOM = (67, 66, 65)


def _as_point_array(points) -> np.ndarray:
    arr = np.asarray(points, dtype=np.float64)
    if arr.shape != (N_POINTS, 2):
        raise ValidationError(f"expected {N_POINTS} (x, y) points, got shape {arr.shape}")
    return arr


@dataclass(frozen=True)
class LandmarkSet:
    """Immutable set of exactly 68 normalized (x, y) keypoints."""

    points: np.ndarray
    schema_id: str = SCHEMA_ID

    def __post_init__(self):
        arr = _as_point_array(self.points)
        if not np.isfinite(arr).all():
            raise ValidationError("landmark coordinates must be finite")
        if (arr < 0.0).any() or (arr > 1.0).any():
            bad = int(np.argmax(((arr < 0.0) | (arr > 1.0)).any(axis=1)))
            raise ValidationError(
                f"landmark {bad} at {tuple(arr[bad])} outside the [0, 1] crop range"
            )
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "points", arr)

    def point(self, index: int) -> tuple[float, float]:
        return float(self.points[index, 0]), float(self.points[index, 1])

    def centroid(self, indices) -> np.ndarray:
        return self.points[list(indices)].mean(axis=0)

    def to_json(self) -> str:
        return json.dumps({"schema": self.schema_id, "points": self.points.tolist()})

    @classmethod
    def from_json(cls, text: str) -> "LandmarkSet":
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"malformed landmark JSON: {exc}") from exc
        if not isinstance(obj, dict) or "points" not in obj:
            raise ValidationError("landmark JSON must be an object with a 'points' field")
        return cls(points=obj["points"], schema_id=obj.get("schema", SCHEMA_ID))


def manipulate(lm: LandmarkSet, edits: dict[int, tuple[float, float]]) -> LandmarkSet:
    """Return a copy of ``lm`` with the indexed points replaced.

    The input set is unmodified; an empty edit map returns an equal set.
    """
    pts = lm.points.copy()
    for index, (x, y) in edits.items():
        if not 0 <= int(index) < N_POINTS:
            raise ValidationError(f"point index {index} out of range [0, {N_POINTS - 1}]")
        pts[int(index)] = (x, y)
    return LandmarkSet(points=pts, schema_id=lm.schema_id)


@dataclass(frozen=True)
class ValidityReport:
    """Soft validation result: warnings never raise."""

    valid: bool
    range_violations: tuple[int, ...] = ()
    eye_order_anomaly: bool = False
    warnings: tuple[str, ...] = ()


def validate(points_or_set) -> ValidityReport:
    """Check a landmark set (or raw 68x2 coordinates) for anomalies.

    Reports out-of-range points and a left/right eye ordering anomaly as
    warnings.  Never raises for coordinate-level problems; only a wrong
    point count is a hard error.
    """
    if isinstance(points_or_set, LandmarkSet):
        arr = np.asarray(points_or_set.points, dtype=np.float64)
    else:
        arr = _as_point_array(points_or_set)

    warnings = []
    bad = ~np.isfinite(arr) | (arr < 0.0) | (arr > 1.0)
    violations = tuple(int(i) for i in np.nonzero(bad.any(axis=1))[0])
    for i in violations:
        warnings.append(f"point {i} at ({arr[i, 0]:g}, {arr[i, 1]:g}) outside [0, 1]")

    finite = np.isfinite(arr).all()
    eye_anomaly = False
    if finite:
        left_x = arr[list(LEFT_EYE), 0].mean()
        right_x = arr[list(RIGHT_EYE), 0].mean()
        if not left_x < right_x:
            eye_anomaly = True
            warnings.append(
                f"left eye centroid x={left_x:.3f} not left of right eye centroid x={right_x:.3f}"
            )

    return ValidityReport(
        valid=not violations and not eye_anomaly,
        range_violations=violations,
        eye_order_anomaly=eye_anomaly,
        warnings=tuple(warnings),
    )


def mouth_gap(lm: LandmarkSet) -> float:
    """Mean |y_top - y_bottom| over the inner-lip point pairs (mouth opening)."""
    top = lm.points[list(MOUTH_INNER_TOP), 1]
    bottom = lm.points[list(MOUTH_INNER_BOTTOM), 1]
    return float(np.abs(top - bottom).mean())


def _frontal_template() -> np.ndarray:
    """Procedural upright frontal face template in normalized coordinates."""
    pts = np.zeros((N_POINTS, 2))
    # jaw: open arc from left temple to right temple through the chin
    t = np.linspace(0.0, np.pi, 17)
    pts[0:17, 0] = 0.5 - 0.34 * np.cos(t)
    pts[0:17, 1] = 0.42 + 0.42 * np.sin(t) ** 1.5
    # brows
    for k in range(5):
        pts[17 + k] = (0.20 + 0.06 * k, 0.32 - 0.02 * np.sin(np.pi * k / 4))
        pts[22 + k] = (0.56 + 0.06 * k, 0.32 - 0.02 * np.sin(np.pi * k / 4))
    # nose bridge and base
    for k in range(4):
        pts[27 + k] = (0.5, 0.38 + 0.055 * k)
    for k in range(5):
        pts[31 + k] = (0.44 + 0.03 * k, 0.575)
    # eyes: 6-point hexagons
    for base, cx in ((36, 0.335), (42, 0.665)):
        ex, ey, w, h = cx, 0.40, 0.065, 0.018
        pts[base + 0] = (ex - w, ey)
        pts[base + 1] = (ex - w / 2, ey - h)
        pts[base + 2] = (ex + w / 2, ey - h)
        pts[base + 3] = (ex + w, ey)
        pts[base + 4] = (ex + w / 2, ey + h)
        pts[base + 5] = (ex - w / 2, ey + h)
    # mouth: outer ring (48-59), inner ring (60-67)
    mx, my, mw = 0.5, 0.72, 0.115
    outer = np.linspace(0, 2 * np.pi, 12, endpoint=False)
    pts[48:60, 0] = mx - mw * np.cos(outer)
    pts[48:60, 1] = my + 0.045 * np.sin(outer)
    inner = np.linspace(0, 2 * np.pi, 8, endpoint=False)
    pts[60:68, 0] = mx - 0.075 * np.cos(inner)
    pts[60:68, 1] = my + 0.018 * np.sin(inner)
    return pts


def template(name: str = "frontal") -> LandmarkSet:
    """Named landmark templates used by fixtures, the service and the editor."""
    base = _frontal_template()
    if name in ("frontal", "frontal-M"):
        pts = base
    elif name == "frontal-F":
        pts = base.copy()
        # narrower jaw, slightly higher brows
        pts[list(JAW), 0] = 0.5 + (pts[list(JAW), 0] - 0.5) * 0.92
        pts[list(BROWS), 1] -= 0.015
    elif name == "mouth-open":
        pts = base.copy()
        pts[list(MOUTH_INNER_TOP), 1] -= 0.02
        pts[list(MOUTH_INNER_BOTTOM), 1] += 0.035
        pts[(55, 56, 57, 58, 59), 1] += 0.03
    else:
        raise ValidationError(f"unknown template {name!r}")
    return LandmarkSet(points=np.clip(pts, 0.0, 1.0))


TEMPLATE_NAMES = ("frontal", "frontal-M", "frontal-F", "mouth-open")


def pairwise_distances(points: np.ndarray) -> np.ndarray:
    """All C(68, 2) = 2278 pairwise Euclidean distances, pairs ordered (i < j)."""
    arr = np.asarray(points, dtype=np.float64)
    iu, ju = np.triu_indices(len(arr), k=1)
    return np.hypot(arr[iu, 0] - arr[ju, 0], arr[iu, 1] - arr[ju, 1])
