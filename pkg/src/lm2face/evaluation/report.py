"""Gender-recognition evaluation over synthesized faces and landmark-only
baselines.

For each method a linear classifier is fit on the training split, then
accuracy is measured over ``n_folds`` random resamples (80% of the test pool
each) and reported as mean +/- std.  The report is a pure function of
(checkpoint, manifest, protocol seed).
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, asdict

import numpy as np

from ..errors import ValidationError
from ..heatmap import DEFAULT_SIGMA_PX
from ..synthesis import load_generator, synthesize_faces
from .landmark_features import landmark_features
from .lbp import N_BINS, lbp_descriptor, to_grayscale
from .svm import evaluate, train_classifier

METHODS = ("synth_lbp", "lm_dist", "lm_angle")


@dataclass(frozen=True)
class RecognitionProtocol:
    n_folds: int = 10
    fold_fraction: float = 0.8
    seed: int = 0
    sigma_px: float = DEFAULT_SIGMA_PX
    lbp_grid: tuple[int, int] = (8, 8)
    regularization: float = 1e-3
    svm_epochs: int = 40
    methods: tuple[str, ...] = METHODS
    # classifier training images for the synthesis column: faces synthesized
    # from the training split's landmarks ("synth") or the real training
    # images ("real")
    lbp_train_source: str = "synth"

    def __post_init__(self):
        if not 0 < self.fold_fraction <= 1:
            raise ValidationError("fold_fraction must be in (0, 1]")
        if self.lbp_train_source not in ("synth", "real"):
            raise ValidationError("lbp_train_source must be 'synth' or 'real'")
        for m in self.methods:
            if m not in METHODS:
                raise ValidationError(f"unknown method {m!r}")


@dataclass(frozen=True)
class MethodResult:
    method: str
    mean: float
    std: float
    n_folds: int
    fold_accuracies: tuple[float, ...]


@dataclass(frozen=True)
class RecognitionReport:
    dataset: str
    results: tuple[MethodResult, ...]

    def result(self, method: str) -> MethodResult:
        for r in self.results:
            if r.method == method:
                return r
        raise KeyError(method)

    def to_json(self) -> str:
        return json.dumps({
            "dataset": self.dataset,
            "results": [asdict(r) for r in self.results],
        }, indent=1)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["method", "dataset", "mean", "std", "n_folds"])
        for r in self.results:
            writer.writerow([r.method, self.dataset, f"{r.mean:.4f}", f"{r.std:.4f}", r.n_folds])
        return buf.getvalue()


def _labels(records) -> np.ndarray:
    return np.array([1.0 if r.gender == "M" else -1.0 for r in records])


def lbp_feature_vector(face, grid) -> np.ndarray:
    """Per-cell histograms normalized to frequencies (scale-free SVM input)."""
    desc = lbp_descriptor(to_grayscale(face.data), grid=grid)
    hist = desc.histogram.reshape(-1, N_BINS)
    return (hist / hist.sum(axis=1, keepdims=True)).ravel()


def recognition_report(checkpoint_path, manifest, protocol: RecognitionProtocol | None = None,
                       dataset_name: str = "fixture") -> RecognitionReport:
    """Evaluate gender recognition for synthesized faces and landmark baselines.

    ``manifest`` must provide train and test splits with landmarks, gender
    labels and (for the training split) real images.
    """
    from ..data import load_pair_arrays  # local import to avoid a cycle

    proto = protocol or RecognitionProtocol()
    train_records = manifest.split_records("train")
    test_records = manifest.split_records("test")
    if not train_records or not test_records:
        raise ValidationError("manifest needs non-empty train and test splits")

    rng = np.random.Generator(np.random.PCG64(proto.seed))
    results = []
    feature_cache: dict[str, tuple[np.ndarray, np.ndarray]] = {}

    for method in proto.methods:
        if method == "synth_lbp":
            net = load_generator(checkpoint_path)
            if proto.lbp_train_source == "synth":
                train_lms = [r.load_landmarks() for r in train_records]
                train_faces = synthesize_faces(net, train_lms, sigma_px=proto.sigma_px)
            else:
                train_faces, _ = load_pair_arrays(train_records)
            test_lms = [r.load_landmarks() for r in test_records]
            synth = synthesize_faces(net, test_lms, sigma_px=proto.sigma_px)
            x_train = np.stack([lbp_feature_vector(f, proto.lbp_grid) for f in train_faces])
            x_test = np.stack([lbp_feature_vector(f, proto.lbp_grid) for f in synth])
        else:
            mode = "distance" if method == "lm_dist" else "angle"
            x_train = np.stack([
                landmark_features(r.load_landmarks(), mode).vector for r in train_records])
            x_test = np.stack([
                landmark_features(r.load_landmarks(), mode).vector for r in test_records])
        feature_cache[method] = (x_train, x_test)

    y_train = _labels(train_records)
    y_test = _labels(test_records)
    n_pick = max(1, int(round(proto.fold_fraction * len(test_records))))

    for method in proto.methods:
        x_train, x_test = feature_cache[method]
        clf = train_classifier(x_train, y_train, reg=proto.regularization,
                               epochs=proto.svm_epochs, seed=proto.seed)
        folds = []
        for _ in range(proto.n_folds):
            idx = rng.choice(len(test_records), size=n_pick, replace=False)
            folds.append(evaluate(clf, x_test[idx], y_test[idx]))
        results.append(MethodResult(
            method=method,
            mean=float(np.mean(folds)),
            std=float(np.std(folds)),
            n_folds=proto.n_folds,
            fold_accuracies=tuple(folds),
        ))
    return RecognitionReport(dataset=dataset_name, results=tuple(results))
