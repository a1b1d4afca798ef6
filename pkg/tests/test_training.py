import json
import math
import os

import numpy as np
import pytest
import torch

from lm2face.errors import TrainingError, ValidationError
from lm2face.fixtures import generate_pairs
from lm2face.losses import LossWeights
from lm2face.training import (
    TrainConfig,
    build_state,
    lr_at_epoch,
    pretrain_gender_classifier,
    resume,
    save_checkpoint,
    train,
    train_step,
)

TINY = dict(generator_preset="tiny", discriminator_preset="tiny",
            weights=LossWeights(lambda_p=0, lambda_c=0, lambda_1=100))


def tiny_config(**kw):
    base = dict(TINY, batch_size=8, epochs=1, seed=3)
    base.update(kw)
    return TrainConfig(**base)


def test_lr_schedule_anchor_values():
    cfg = TrainConfig()
    assert lr_at_epoch(cfg, 0) == 2e-4
    assert lr_at_epoch(cfg, 100) == 2e-4
    assert lr_at_epoch(cfg, 150) == 1e-4
    assert lr_at_epoch(cfg, 200) == 0.0
    assert lr_at_epoch(cfg, 250) == 0.0  # clamped, never negative
    assert lr_at_epoch(cfg, 101) < 2e-4
    with pytest.raises(ValidationError):
        lr_at_epoch(cfg, -1)


def test_lr_schedule_is_subtractive_linear():
    cfg = TrainConfig()
    values = [lr_at_epoch(cfg, e) for e in range(101, 200)]
    diffs = np.diff(values)
    assert np.allclose(diffs, -2e-6, atol=1e-18)


def test_config_validation_and_json_round_trip():
    with pytest.raises(ValidationError):
        TrainConfig(lr_g=0.0)
    with pytest.raises(ValidationError):
        TrainConfig(batch_size=0)
    cfg = tiny_config(epochs=5)
    back = TrainConfig.from_json(cfg.to_json())
    assert back == cfg


def test_zero_final_discriminator_layer_gives_2ln2(fixture_pairs):
    state = build_state(tiny_config())
    with torch.no_grad():
        state.discriminator.layers["d5"].weight.zero_()
        state.discriminator.layers["d5"].bias.zero_()
    train_step(state, fixture_pairs)
    assert state.d_losses[0] == pytest.approx(2 * math.log(2), abs=1e-6)


def test_training_changes_both_parameter_sets(fixture_pairs):
    state = build_state(tiny_config())
    g_before = [p.detach().clone() for p in state.generator.parameters()]
    d_before = [p.detach().clone() for p in state.discriminator.parameters()]
    train_step(state, fixture_pairs)
    assert any(not torch.equal(a, b) for a, b in zip(g_before, state.generator.parameters()))
    assert any(not torch.equal(a, b) for a, b in zip(d_before, state.discriminator.parameters()))


def test_two_runs_identical_loss_reports(fixture_pairs):
    def run():
        state = build_state(tiny_config(seed=17))
        return [train_step(state, fixture_pairs)[1] for _ in range(12)]

    assert run() == run()  # dataclass equality is exact float equality


def test_l1_decreases_during_overfit(fixture_pairs):
    state = build_state(tiny_config(seed=9))
    first = train_step(state, fixture_pairs)[1]
    for _ in range(60):
        _, last = train_step(state, fixture_pairs)
    assert last.l_l1 < first.l_l1


def test_train_rejects_empty_and_short_datasets(tmp_path):
    with pytest.raises(ValidationError):
        train(tiny_config(), [], out_dir=tmp_path)
    with pytest.raises(ValidationError):
        train(tiny_config(batch_size=64), generate_pairs(8, seed=0), out_dir=tmp_path)


def test_two_epoch_run_emits_summaries_checkpoint_and_log(tmp_path):
    pairs = generate_pairs(32, seed=4)
    cfg = tiny_config(epochs=2, checkpoint_every=1, seed=5)
    result = train(cfg, pairs, out_dir=tmp_path)
    assert len(result.epoch_summaries) == 2
    assert len(result.checkpoints) >= 1
    assert [s.n_steps for s in result.epoch_summaries] == [4, 4]

    with open(result.log_path) as fh:
        steps = [json.loads(line)["step"] for line in fh]
    assert steps == sorted(steps) and len(steps) == 8
    with open(os.path.join(tmp_path, "epochs.jsonl")) as fh:
        assert len(fh.readlines()) == 2


def test_checkpoint_resume_forward_equivalence(tmp_path, fixture_pairs):
    state = build_state(tiny_config(seed=21))
    for _ in range(5):
        train_step(state, fixture_pairs)
    state.epoch = 1
    path = save_checkpoint(state, tmp_path / "ck")

    heat = torch.from_numpy(np.stack(
        [np.asarray(h.data, dtype=np.float32)[None] for h, _, _ in fixture_pairs]))
    state.generator.eval()
    with torch.no_grad():
        before = state.generator(heat)

    restored = resume(path)
    restored.generator.eval()
    with torch.no_grad():
        after = restored.generator(heat)
    assert torch.equal(before, after)
    assert restored.step == state.step
    assert restored.epoch == 1


def test_resume_continues_deterministically(tmp_path):
    pairs = generate_pairs(16, seed=6)
    cfg = tiny_config(epochs=2, checkpoint_every=1, seed=8)
    full = train(cfg, pairs, out_dir=tmp_path / "full")

    half = train(cfg, pairs, out_dir=tmp_path / "half")  # reuse epoch-1 checkpoint
    state = resume(os.path.join(tmp_path / "half", "checkpoints", "epoch_0001"))
    cont = train(cfg, pairs, out_dir=tmp_path / "cont", state=state)
    assert [r.l_total for r in cont.reports] == [r.l_total for r in full.reports[2:]]


def test_nonfinite_loss_aborts_with_checkpoint_reference(tmp_path, fixture_pairs):
    state = build_state(tiny_config())
    state.epoch = 1
    save_checkpoint(state, tmp_path / "good")
    with torch.no_grad():
        state.generator.layers["stem"].weight.fill_(float("nan"))
    with pytest.raises(TrainingError) as err:
        train_step(state, fixture_pairs)
    assert err.value.last_checkpoint == str(tmp_path / "good")


def _solid_color_set(n_per_class=100, seed=0):
    rng = np.random.Generator(np.random.PCG64(seed))
    images, labels = [], []
    for _ in range(n_per_class):
        img = np.full((3, 64, 64), -1.0, dtype=np.float32)
        img[0] = 0.8 + rng.normal(0, 0.05)   # red-ish
        images.append(img)
        labels.append(1.0)
        img = np.full((3, 64, 64), -1.0, dtype=np.float32)
        img[2] = 0.8 + rng.normal(0, 0.05)   # blue-ish
        images.append(img)
        labels.append(0.0)
    x = torch.from_numpy(np.stack(images))
    y = torch.tensor(labels)
    order = torch.from_numpy(rng.permutation(len(labels)))
    return x[order], y[order]


def _fine_tune_and_score(preset, x, y, epochs=300):
    from lm2face.networks import classifier_config
    from lm2face.networks.runtime import GenderClassifier

    half = len(y) // 2
    clf = GenderClassifier.create(classifier_config(preset), seed=2)
    history = pretrain_gender_classifier(clf, x[:half], y[:half], epochs=epochs,
                                         lr=1e-2, seed=3)
    assert history[-1] < history[0]
    with torch.no_grad():
        held_out = clf.score(x[half:])
    return ((held_out > 0.5).float() == y[half:]).float().mean().item()


def test_pretrain_classifier_on_solid_colors_tiny_backbone():
    x, y = _solid_color_set(100)
    assert _fine_tune_and_score("tiny", x, y) >= 0.99


@pytest.mark.slow
def test_pretrain_classifier_on_solid_colors_full_backbone():
    x, y = _solid_color_set(100)
    assert _fine_tune_and_score("paper", x, y) >= 0.99
