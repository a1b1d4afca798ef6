"""lm2face: face synthesis from 68-point facial landmarks.

Subsystems: landmark data model and Gaussian heatmap encoding, a dense
encoder/decoder generator with a patch discriminator, the four-term training
objective, gender-recognition evaluation, a CLI and an HTTP inference
service.
"""

from .errors import (
    BuildError,
    CheckpointError,
    DegenerateInputError,
    Lm2FaceError,
    TrainingError,
    ValidationError,
)
from .heatmap import DEFAULT_SIGMA_PX, HeatmapTensor, render_heatmap, sigma_from_mode
from .images import FaceImage
from .landmarks import LandmarkSet, ValidityReport, manipulate, mouth_gap, template, validate
from .losses import LossReport, LossWeights

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
