"""Gender-recognition evaluation: LBP descriptors, landmark features, the
linear classifier and the recognition report."""

from .lbp import (
    LBPDescriptor,
    N_BINS,
    circular_transitions,
    lbp_code,
    lbp_code_map,
    lbp_descriptor,
    to_grayscale,
    uniform_bin_map,
)
from .landmark_features import (
    LandmarkFeature,
    N_PAIRS,
    interocular_distance,
    landmark_features,
)
from .svm import LinearClassifier, evaluate, train_classifier
from .report import (
    METHODS,
    MethodResult,
    RecognitionProtocol,
    RecognitionReport,
    lbp_feature_vector,
    recognition_report,
)

__all__ = [name for name in dir() if not name.startswith("_")]
