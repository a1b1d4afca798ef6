import numpy as np
import pytest

from lm2face.errors import ValidationError
from lm2face.evaluation.svm import LinearClassifier, evaluate, train_classifier


def blobs(n=200, margin=1.0, seed=0):
    rng = np.random.Generator(np.random.PCG64(seed))
    half = n // 2
    pos = rng.normal((margin, margin), 0.4, size=(half, 2))
    neg = rng.normal((-margin, -margin), 0.4, size=(half, 2))
    x = np.vstack([pos, neg])
    y = np.concatenate([np.ones(half), -np.ones(half)])
    perm = rng.permutation(n)
    return x[perm], y[perm]


def test_separable_blobs_high_holdout_accuracy():
    x, y = blobs(400, margin=1.0, seed=7)
    clf = train_classifier(x[:200], y[:200], reg=1e-2, seed=0)
    assert evaluate(clf, x[200:], y[200:]) >= 0.99


def test_training_beats_random_weights():
    x, y = blobs(200, margin=0.8, seed=3)
    clf = train_classifier(x, y, reg=1e-2, seed=0)
    rng = np.random.Generator(np.random.PCG64(9))
    random_clf = LinearClassifier(weights=rng.normal(size=2), bias=0.0, regularization=1e-2)
    assert evaluate(clf, x, y) >= evaluate(random_clf, x, y)


def test_flipped_labels_complement_accuracy():
    x, y = blobs(200, margin=0.6, seed=5)
    clf = train_classifier(x, y, reg=1e-2, seed=0)
    acc = evaluate(clf, x, y)
    assert evaluate(clf, x, -y) == pytest.approx(1.0 - acc, abs=1e-12)


def test_deterministic_for_fixed_seed():
    x, y = blobs(100, seed=2)
    a = train_classifier(x, y, reg=1e-2, seed=4)
    b = train_classifier(x, y, reg=1e-2, seed=4)
    assert np.array_equal(a.weights, b.weights)
    assert a.bias == b.bias


def test_single_class_rejected():
    x = np.zeros((10, 3))
    with pytest.raises(ValidationError):
        train_classifier(x, np.ones(10), reg=1e-2)


def test_label_and_shape_validation():
    x, y = blobs(20, seed=1)
    with pytest.raises(ValidationError):
        train_classifier(x, np.zeros(20), reg=1e-2)  # labels must be +/-1
    with pytest.raises(ValidationError):
        train_classifier(x, y, reg=0.0)
    clf = train_classifier(x, y, reg=1e-2)
    with pytest.raises(ValidationError):
        clf.decision(np.zeros((4, 5)))
