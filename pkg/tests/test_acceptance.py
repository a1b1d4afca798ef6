"""Acceptance suite: one test per criterion, each printing a PASS line with
the measured values.  Run with `pytest tests/test_acceptance.py -v -s`.

The two training-based criteria (overfit smoke, desk-scale ordering) carry
the `slow` marker; everything else finishes in seconds.
"""

import math
import time

import numpy as np
import pytest
import torch

from lm2face.losses import LossWeights

torch.set_num_threads(1)


def report(name, detail):
    print(f"\nPASS {name}: {detail}", flush=True)


def test_architecture_ledger():
    from lm2face.networks import REFERENCE_SIGNATURE, build_generator

    t0 = time.perf_counter()
    spec = build_generator()
    signature = spec.channel_signature()
    rows = {row.name: row for row in spec.shape_ledger()}
    elapsed = time.perf_counter() - t0

    assert signature == REFERENCE_SIGNATURE
    assert len(signature.split("-")) == 19
    assert spec.output_shape() == (3, 64, 64)
    assert rows["enc1"].channels == 64 + 6 * 32 == 256
    assert rows["enc3"].channels == 256 + 24 * 32 == 1024
    assert rows["enc4"].channels == 512 + 16 * 32 == 1024
    assert elapsed < 1.0
    report("architecture ledger",
           f"19-entry signature exact, output 3x64x64, {elapsed * 1000:.0f} ms")


def test_loss_analytics():
    from lm2face.losses import composite_loss, d_loss, g_adv_loss, l1_loss

    t0 = time.perf_counter()
    tol = 1e-6
    half = torch.full((2, 1, 6, 6), 0.5)
    assert abs(float(d_loss(half, half)) - 2 * math.log(2)) < tol
    assert float(g_adv_loss(torch.tensor([math.exp(-1.0)]))) == pytest.approx(1.0, abs=tol)
    assert float(g_adv_loss(torch.tensor([0.5, 0.25]))) == pytest.approx(
        (math.log(2) + math.log(4)) / 2, abs=tol)
    a = torch.zeros(1, 3, 8, 8)
    assert float(l1_loss(a, a)) == 0.0
    assert float(l1_loss(a + 0.1, a)) == pytest.approx(0.1, abs=tol)
    total, rep = composite_loss(1.0, 2.0, 3.0, 4.0,
                                LossWeights(lambda_p=1, lambda_c=1, lambda_1=100))
    assert float(total) == 406.0 and rep.l_total == 406.0
    elapsed = time.perf_counter() - t0
    assert elapsed < 1.0
    report("loss analytics", f"all analytic values within {tol}, composite 406 exact")


def test_gradient_check():
    from test_gradcheck import (
        build_setup,
        composite_value,
        finite_difference_grads,
        relative_error,
    )

    t0 = time.perf_counter()
    weights = LossWeights(lambda_p=1.0, lambda_c=1.0, lambda_1=100.0)
    g, d, v, c, heat, real = build_setup(seed=0)
    composite_value(g, d, v, c, heat, real, weights).backward()
    analytic = [p.grad.clone() for p in g.parameters()]
    numeric = finite_difference_grads(
        list(g.parameters()), lambda: composite_value(g, d, v, c, heat, real, weights))
    err = relative_error(analytic, numeric)
    elapsed = time.perf_counter() - t0
    assert err < 1e-3
    assert elapsed < 30.0
    report("gradient check",
           f"composite-loss grads vs central FD rel err {err:.2e} in {elapsed:.1f} s")


def test_heatmap_suite(rng):
    from lm2face.heatmap import render_heatmap
    from lm2face.landmarks import LandmarkSet, template

    t0 = time.perf_counter()
    heat = render_heatmap(LandmarkSet(points=np.full((68, 2), 0.5)), 64, 2.0)
    assert heat.data[32, 32] == 1.0
    assert abs(heat.data[33, 32] - math.exp(-1 / 8)) < 1e-12

    pts = rng.uniform(0.05, 0.95, size=(68, 2))
    perm = rng.permutation(68)
    a = render_heatmap(LandmarkSet(points=pts), 64, 2.0)
    b = render_heatmap(LandmarkSet(points=pts[perm]), 64, 2.0)
    assert np.array_equal(a.data, b.data)

    lm = template("frontal")
    k = 3
    shifted = LandmarkSet(points=lm.points + k / 64.0)
    a = render_heatmap(lm, 64, 2.0)
    b = render_heatmap(shifted, 64, 2.0)
    assert np.array_equal(a.data[8:-8 - k, 8:-8 - k], b.data[8 + k:-8, 8 + k:-8])

    one = render_heatmap(LandmarkSet(points=np.full((68, 2), (0.3, 0.7))), 64, 2.0)
    two = render_heatmap(LandmarkSet(points=np.full((68, 2), (0.3, 0.7))), 64, 2.0)
    assert np.array_equal(one.data, two.data)
    elapsed = time.perf_counter() - t0
    assert elapsed < 5.0
    report("heatmap suite",
           f"peak/ordering/translation/idempotence exact, {elapsed * 1000:.0f} ms")


def test_lbp_oracle(rng):
    from lm2face.evaluation.lbp import circular_transitions, lbp_descriptor
    from test_lbp import oracle_descriptor

    t0 = time.perf_counter()
    for _ in range(20):
        img = rng.random((16, 16))
        ours = lbp_descriptor(img, grid=(4, 4)).histogram
        assert np.array_equal(ours, oracle_descriptor(img, (4, 4)))
    census = sum(1 for c in range(256) if circular_transitions(c) <= 2)
    assert census == 58
    elapsed = time.perf_counter() - t0
    assert elapsed < 10.0
    report("LBP oracle", f"20/20 images exact, uniform census {census}, {elapsed:.1f} s")


def test_landmark_features(rng):
    from lm2face.evaluation.landmark_features import landmark_features
    from lm2face.landmarks import template

    pts = template("frontal").points
    base = landmark_features(pts, "distance")
    assert base.vector.shape == (2278,)
    worst = 0.0
    for _ in range(5):
        angle = rng.uniform(-np.pi, np.pi)
        scale = rng.uniform(0.2, 3.0)
        shift = rng.normal(0, 2, size=2)
        rot = np.array([[np.cos(angle), -np.sin(angle)], [np.sin(angle), np.cos(angle)]])
        moved = pts @ rot.T * scale + shift
        worst = max(worst, float(np.abs(
            landmark_features(moved, "distance").vector - base.vector).max()))
    assert worst < 1e-12
    report("landmark features", f"2278-dim, similarity invariance {worst:.2e}")


@pytest.mark.slow
def test_overfit_smoke():
    from lm2face.fixtures import generate_pairs
    from lm2face.training import TrainConfig, build_state, train_step

    t0 = time.perf_counter()
    # frozen smoke configuration; first recorded run: l_l1 0.4337 -> 0.0500
    cfg = TrainConfig(generator_preset="small", discriminator_preset="small",
                      weights=LossWeights(lambda_p=0, lambda_c=0, lambda_1=100),
                      batch_size=8, epochs=1, seed=7, lr_g=1e-3, lr_d=5e-4)
    state = build_state(cfg)
    pairs = generate_pairs(8, seed=3)
    first = None
    for _ in range(500):
        _, rep = train_step(state, pairs)
        if first is None:
            first = rep
    elapsed = time.perf_counter() - t0
    assert rep.l_l1 < 0.5 * first.l_l1
    assert rep.l_l1 < 0.08
    assert elapsed < 600.0
    report("overfit smoke",
           f"l_l1 {first.l_l1:.4f} -> {rep.l_l1:.4f} "
           f"({rep.l_l1 / first.l_l1:.1%}) in {elapsed / 60:.1f} min")


@pytest.mark.slow
def test_desk_scale_ordering(tmp_path):
    from lm2face.data import make_pairs
    from lm2face.evaluation import RecognitionProtocol, recognition_report
    from lm2face.fixtures import FixtureSpec, generate_corpus
    from lm2face.training import TrainConfig, train

    t0 = time.perf_counter()
    manifest = generate_corpus(tmp_path, FixtureSpec(n_train=200, n_test=100, seed=11))
    pairs, _ = make_pairs(manifest, "train", seed=5)
    cfg = TrainConfig(generator_preset="small", discriminator_preset="small",
                      weights=LossWeights(lambda_p=0, lambda_c=0, lambda_1=100),
                      batch_size=8, epochs=20, seed=7, checkpoint_every=20)
    result = train(cfg, pairs, out_dir=tmp_path / "run")
    rep = recognition_report(result.checkpoints[-1], manifest,
                             RecognitionProtocol(seed=13))
    elapsed = time.perf_counter() - t0
    synth = rep.result("synth_lbp")
    lm_d = rep.result("lm_dist")
    assert synth.mean >= lm_d.mean
    assert elapsed < 1800.0
    report("desk-scale ordering",
           f"synth_lbp {synth.mean:.3f}+/-{synth.std:.3f} >= "
           f"lm_dist {lm_d.mean:.3f}+/-{lm_d.std:.3f} in {elapsed / 60:.1f} min")


def test_determinism_and_checkpoint_round_trip(tmp_path):
    from lm2face.fixtures import generate_pairs
    from lm2face.training import TrainConfig, build_state, resume, save_checkpoint, train_step

    cfg = TrainConfig(generator_preset="small", discriminator_preset="small",
                      weights=LossWeights(lambda_p=0, lambda_c=0, lambda_1=100),
                      batch_size=8, epochs=1, seed=23)
    pairs = generate_pairs(8, seed=3)

    def run():
        state = build_state(cfg)
        return state, [train_step(state, pairs)[1] for _ in range(50)]

    state_a, reports_a = run()
    _, reports_b = run()
    assert reports_a == reports_b  # exact float equality across all 50 steps

    state_a.epoch = 1
    path = save_checkpoint(state_a, tmp_path / "ck")
    heat = torch.from_numpy(np.stack(
        [np.asarray(h.data, dtype=np.float32)[None] for h, _, _ in pairs]))
    state_a.generator.eval()
    with torch.no_grad():
        before = state_a.generator(heat)
    restored = resume(path)
    restored.generator.eval()
    with torch.no_grad():
        after = restored.generator(heat)
    assert torch.equal(before, after)
    report("determinism", "50-step reports bit-identical; checkpoint round-trip "
                          "observationally equivalent")


def test_lr_schedule_anchors():
    from lm2face.training import TrainConfig, lr_at_epoch

    cfg = TrainConfig()
    v100, v150, v200 = (lr_at_epoch(cfg, e) for e in (100, 150, 200))
    assert v100 == 2e-4
    assert v150 == 1e-4
    assert v200 == 0.0
    report("LR schedule anchors", f"epochs 100/150/200 -> {v100}/{v150}/{v200} exactly")
