"""Alternating generator/discriminator optimization.

Each step runs one discriminator update followed by one generator update on
the same batch.  Runs are reproducible: a fixed seed fixes the weight init,
the data order and therefore the full LossReport stream.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, asdict
from fractions import Fraction

import numpy as np
import torch

from .errors import CheckpointError, TrainingError, ValidationError
from .heatmap import DEFAULT_SIGMA_PX
from .losses import (
    LossReport,
    LossWeights,
    composite_loss,
    d_loss,
    g_adv_loss,
    gender_loss,
    l1_loss,
    perceptual_loss,
)
from .networks import (
    ParameterSet,
    classifier_config,
    compile_network,
    discriminator_config,
    generator_config,
    build_discriminator,
    build_generator,
    load_network_spec,
    load_parameter_set,
    save_network,
    save_parameter_set,
)
from .networks.runtime import FeatureExtractor, GenderClassifier, faces_to_tensor
from .networks.build import FEATURE_PRESETS


@dataclass(frozen=True)
class TrainConfig:
    lr_g: float = 2e-4
    lr_d: float = 2e-4
    epochs: int = 200
    decay_start: int = 100
    decay_per_epoch: float = 2e-6
    batch_size: int = 16
    seed: int = 0
    weights: LossWeights = field(default_factory=LossWeights)
    adam_beta1: float = 0.5
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    checkpoint_every: int = 50
    sigma_px: float = DEFAULT_SIGMA_PX
    generator_preset: str = "paper"
    discriminator_preset: str = "paper"
    classifier_preset: str = "paper"
    feature_preset: str = "paper"
    backbone_weights: str | None = None
    literal_gender_formula: bool = False
    hard_gender_labels: bool = False

    def __post_init__(self):
        if self.lr_g <= 0 or self.lr_d <= 0:
            raise ValidationError("learning rates must be positive")
        if self.epochs < 1 or self.batch_size < 1:
            raise ValidationError("epochs and batch_size must be >= 1")
        if self.decay_per_epoch < 0:
            raise ValidationError("decay_per_epoch must be >= 0")

    def to_json(self) -> str:
        obj = asdict(self)
        return json.dumps(obj, indent=1, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "TrainConfig":
        obj = json.loads(text)
        weights = obj.pop("weights", None)
        cfg = cls(**obj, weights=LossWeights(**weights) if weights else LossWeights())
        return cfg


def lr_at_epoch(cfg: TrainConfig, epoch: int, base_lr: float | None = None) -> float:
    """Learning rate for an epoch: constant through ``decay_start``, then a
    subtractive linear decay clamped at zero.

    Decimal arithmetic keeps the anchor epochs exact (e.g. defaults give
    2e-4 / 1e-4 / 0 at epochs 100 / 150 / 200).
    """
    if epoch < 0:
        raise ValidationError("epoch must be >= 0")
    base = cfg.lr_g if base_lr is None else base_lr
    if epoch <= cfg.decay_start:
        return base
    k = epoch - cfg.decay_start
    value = Fraction(str(base)) - Fraction(str(cfg.decay_per_epoch)) * k
    return float(max(Fraction(0), value))


class TrainState:
    """Everything one training run owns: the networks, their optimizers and
    the step/epoch counters."""

    def __init__(self, cfg: TrainConfig, generator, discriminator,
                 extractor=None, classifier=None):
        self.cfg = cfg
        self.generator = generator
        self.discriminator = discriminator
        self.extractor = extractor
        self.classifier = classifier
        self.opt_g = torch.optim.Adam(generator.parameters(), lr=cfg.lr_g,
                                      betas=(cfg.adam_beta1, cfg.adam_beta2), eps=cfg.adam_eps)
        self.opt_d = torch.optim.Adam(discriminator.parameters(), lr=cfg.lr_d,
                                      betas=(cfg.adam_beta1, cfg.adam_beta2), eps=cfg.adam_eps)
        self.step = 0
        self.epoch = 0
        self.d_losses: list[float] = []
        self.last_checkpoint: str | None = None

    def set_lr(self, epoch: int) -> None:
        g_lr = lr_at_epoch(self.cfg, epoch, self.cfg.lr_g)
        d_lr = lr_at_epoch(self.cfg, epoch, self.cfg.lr_d)
        for group in self.opt_g.param_groups:
            group["lr"] = g_lr
        for group in self.opt_d.param_groups:
            group["lr"] = d_lr


def build_state(cfg: TrainConfig) -> TrainState:
    """Construct networks and optimizers deterministically from the config."""
    torch.manual_seed(cfg.seed)
    g_spec = build_generator(generator_config(cfg.generator_preset))
    d_spec = build_discriminator(discriminator_config(cfg.discriminator_preset))
    generator = compile_network(g_spec, init="gan", seed=cfg.seed)
    discriminator = compile_network(d_spec, init="gan", seed=cfg.seed + 1)

    extractor = None
    if cfg.weights.lambda_p > 0:
        extractor = FeatureExtractor.create(
            FEATURE_PRESETS[cfg.feature_preset],
            weights_path=cfg.backbone_weights, seed=cfg.seed + 2)
    classifier = None
    if cfg.weights.lambda_c > 0:
        classifier = GenderClassifier.create(
            classifier_config(cfg.classifier_preset),
            weights_path=cfg.backbone_weights, seed=cfg.seed + 3)
    return TrainState(cfg, generator, discriminator, extractor, classifier)


def _batch_tensors(batch):
    """(heatmaps, faces, labels) from a list of (HeatmapTensor, FaceImage, label)."""
    heat = torch.from_numpy(np.stack(
        [np.asarray(h.data, dtype=np.float32)[None] for h, _, _ in batch]))
    faces = faces_to_tensor([f for _, f, _ in batch])
    labels = torch.tensor([1.0 if g == "M" else 0.0 for _, _, g in batch])
    return heat, faces, labels


def train_step(state: TrainState, batch) -> tuple[TrainState, LossReport]:
    """One discriminator update followed by one generator update."""
    cfg = state.cfg
    if torch.is_tensor(batch[0]):
        heat, real, labels = batch
    else:
        heat, real, labels = _batch_tensors(batch)
    state.generator.train()
    state.discriminator.train()

    fake = state.generator(heat)

    # discriminator on real pair and detached fake pair
    state.opt_d.zero_grad(set_to_none=True)
    d_real = state.discriminator(torch.cat([heat, real], dim=1))
    d_fake = state.discriminator(torch.cat([heat, fake.detach()], dim=1))
    loss_d = d_loss(d_real, d_fake)
    d_value = float(loss_d.detach())
    if not np.isfinite(d_value):
        raise TrainingError(f"non-finite discriminator loss at step {state.step}",
                            last_checkpoint=state.last_checkpoint)
    loss_d.backward()
    state.opt_d.step()

    # generator on the updated discriminator
    state.opt_g.zero_grad(set_to_none=True)
    l_adv = g_adv_loss(state.discriminator(torch.cat([heat, fake], dim=1)))
    zero = torch.zeros((), dtype=fake.dtype)
    l_perc = (perceptual_loss(fake, real, state.extractor)
              if cfg.weights.lambda_p > 0 else zero)
    if cfg.weights.lambda_c > 0:
        l_gen = gender_loss(real, fake, state.classifier,
                            literal_formula=cfg.literal_gender_formula,
                            hard_labels=labels if cfg.hard_gender_labels else None)
    else:
        l_gen = zero
    l_1 = l1_loss(fake, real)
    try:
        total, report = composite_loss(l_adv, l_perc, l_gen, l_1, cfg.weights, step=state.step)
    except TrainingError as exc:
        raise TrainingError(str(exc), last_checkpoint=state.last_checkpoint) from exc
    total.backward()
    state.opt_g.step()

    state.d_losses.append(d_value)
    state.step += 1
    return state, report


@dataclass
class EpochSummary:
    epoch: int
    lr: float
    mean_d_loss: float
    mean_l_total: float
    mean_l_l1: float
    n_steps: int

    def to_json_line(self) -> str:
        return json.dumps(asdict(self))


@dataclass
class TrainResult:
    checkpoints: list[str]
    epoch_summaries: list[EpochSummary]
    reports: list[LossReport]
    log_path: str | None


def _epoch_order(seed: int, epoch: int, n: int) -> np.ndarray:
    return np.random.Generator(np.random.PCG64(seed * 100_003 + epoch)).permutation(n)


def train(cfg: TrainConfig, dataset, out_dir=None, state: TrainState | None = None,
          log_every: int = 1) -> TrainResult:
    """Run the full schedule over ``dataset`` (a sequence of
    (HeatmapTensor, FaceImage, gender) triples).

    Writes a JSON-lines step log, epoch summaries and periodic checkpoints
    under ``out_dir`` when given.
    """
    pairs = list(dataset)
    if not pairs:
        raise ValidationError("dataset is empty; nothing to train on")
    if len(pairs) < cfg.batch_size:
        raise ValidationError(
            f"dataset ({len(pairs)} pairs) smaller than one batch ({cfg.batch_size})")

    state = state or build_state(cfg)
    start_epoch = state.epoch
    log_fh = None
    log_path = None
    checkpoints = []
    summaries = []
    reports = []
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        log_path = os.path.join(out_dir, "train_log.jsonl")
        log_fh = open(log_path, "a", buffering=1)

    try:
        for epoch in range(start_epoch, cfg.epochs):
            state.set_lr(epoch + 1)
            order = _epoch_order(cfg.seed, epoch, len(pairs))
            epoch_reports = []
            for lo in range(0, len(order), cfg.batch_size):
                batch = [pairs[i] for i in order[lo:lo + cfg.batch_size]]
                _, report = train_step(state, batch)
                epoch_reports.append(report)
                reports.append(report)
                if log_fh and state.step % log_every == 0:
                    log_fh.write(report.to_json_line() + "\n")
            state.epoch = epoch + 1
            summary = EpochSummary(
                epoch=state.epoch,
                lr=lr_at_epoch(cfg, state.epoch),
                mean_d_loss=float(np.mean(state.d_losses[-len(epoch_reports):])),
                mean_l_total=float(np.mean([r.l_total for r in epoch_reports])),
                mean_l_l1=float(np.mean([r.l_l1 for r in epoch_reports])),
                n_steps=len(epoch_reports),
            )
            summaries.append(summary)
            if out_dir is not None:
                with open(os.path.join(out_dir, "epochs.jsonl"), "a") as fh:
                    fh.write(summary.to_json_line() + "\n")
                last = state.epoch == cfg.epochs
                if last or state.epoch % cfg.checkpoint_every == 0:
                    path = os.path.join(out_dir, "checkpoints", f"epoch_{state.epoch:04d}")
                    save_checkpoint(state, path)
                    checkpoints.append(path)
    finally:
        if log_fh:
            log_fh.close()
    return TrainResult(checkpoints=checkpoints, epoch_summaries=summaries,
                       reports=reports, log_path=log_path)


def _optimizer_tensors(opt) -> dict[str, np.ndarray]:
    tensors = {}
    sd = opt.state_dict()
    for pid, entry in sd["state"].items():
        for key, value in entry.items():
            if torch.is_tensor(value):
                tensors[f"p{pid}.{key}"] = value.detach().cpu().numpy().copy()
            else:
                tensors[f"p{pid}.{key}"] = np.asarray([float(value)], dtype=np.float64)
    return tensors


def _restore_optimizer(opt, tensors: dict[str, np.ndarray]) -> None:
    sd = opt.state_dict()
    state = {}
    for name, arr in tensors.items():
        pid_part, _, key = name.partition(".")
        pid = int(pid_part[1:])
        entry = state.setdefault(pid, {})
        if key == "step":
            entry[key] = torch.tensor(float(arr.reshape(-1)[0]))
        else:
            entry[key] = torch.from_numpy(arr.copy())
    sd["state"] = state
    opt.load_state_dict(sd)


def save_checkpoint(state: TrainState, path) -> str:
    """Checkpoint directory: one sub-directory per network plus optimizers
    and a state.json with config and counters."""
    os.makedirs(path, exist_ok=True)
    g_spec = state.generator.spec
    d_spec = state.discriminator.spec
    save_network(state.generator, g_spec, os.path.join(path, "generator"),
                 epoch=state.epoch, seed=state.cfg.seed)
    save_network(state.discriminator, d_spec, os.path.join(path, "discriminator"),
                 epoch=state.epoch, seed=state.cfg.seed)
    if state.classifier is not None:
        save_network(state.classifier.net, state.classifier.spec,
                     os.path.join(path, "classifier"), epoch=state.epoch, seed=state.cfg.seed)
    save_parameter_set(ParameterSet(_optimizer_tensors(state.opt_g),
                                    spec_hash="adam:" + g_spec.spec_hash(),
                                    epoch=state.epoch),
                       os.path.join(path, "opt_g"))
    save_parameter_set(ParameterSet(_optimizer_tensors(state.opt_d),
                                    spec_hash="adam:" + d_spec.spec_hash(),
                                    epoch=state.epoch),
                       os.path.join(path, "opt_d"))
    blob = {
        "epoch": state.epoch,
        "step": state.step,
        "config": json.loads(state.cfg.to_json()),
        "torch_rng": torch.get_rng_state().numpy().tobytes().hex(),
    }
    with open(os.path.join(path, "state.json"), "w") as fh:
        json.dump(blob, fh, indent=1, sort_keys=True)
    state.last_checkpoint = str(path)
    return str(path)


def resume(path) -> TrainState:
    """Rebuild a TrainState from a checkpoint directory."""
    state_path = os.path.join(path, "state.json")
    try:
        with open(state_path) as fh:
            blob = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"unreadable training state at {state_path}: {exc}") from exc
    cfg = TrainConfig.from_json(json.dumps(blob["config"]))
    state = build_state(cfg)
    g_spec = load_network_spec(os.path.join(path, "generator"))
    load_parameter_set(os.path.join(path, "generator"), g_spec).load_into_module(state.generator)
    d_spec = load_network_spec(os.path.join(path, "discriminator"))
    load_parameter_set(os.path.join(path, "discriminator"), d_spec).load_into_module(
        state.discriminator)
    clf_dir = os.path.join(path, "classifier")
    if state.classifier is not None and os.path.isdir(clf_dir):
        load_parameter_set(clf_dir, state.classifier.spec).load_into_module(state.classifier.net)
    _restore_optimizer(state.opt_g, load_parameter_set(os.path.join(path, "opt_g")).tensors)
    _restore_optimizer(state.opt_d, load_parameter_set(os.path.join(path, "opt_d")).tensors)
    state.epoch = blob["epoch"]
    state.step = blob["step"]
    state.last_checkpoint = str(path)
    torch.set_rng_state(torch.frombuffer(
        bytearray.fromhex(blob["torch_rng"]), dtype=torch.uint8).clone())
    return state


def pretrain_gender_classifier(classifier: GenderClassifier, images: torch.Tensor,
                               labels: torch.Tensor, epochs: int = 200, lr: float = 1e-2,
                               seed: int = 0) -> list[float]:
    """Fit the classifier head on cached pooled backbone features with
    standard binary cross entropy; the backbone stays frozen.

    The head's first affine layer gets a data-dependent whitening init
    (training-set feature mean/std folded into its weights), without which a
    deep random backbone's tiny feature variance stalls optimization.
    """
    torch.manual_seed(seed)
    feats = classifier.backbone_features(images)
    target = labels.to(torch.float32)
    head = list(classifier.head_parameters())
    if not head:
        raise ValidationError("classifier has no trainable head parameters")
    with torch.no_grad():
        mean = feats.mean(dim=0)
        scale = 1.0 / (feats.std(dim=0) + 1e-8)
        head1 = classifier.net.layers["head1"].linear
        head1.weight.mul_(scale[None, :])           # W' = W diag(scale)
        head1.bias.sub_(head1.weight @ mean)        # b' = b - W' mean
    opt = torch.optim.Adam(head, lr=lr)
    history = []
    eps = 1e-7
    for _ in range(epochs):
        opt.zero_grad(set_to_none=True)
        p = torch.clamp(classifier.score_from_features(feats), eps, 1 - eps)
        loss = -(target * torch.log(p) + (1 - target) * torch.log(1 - p)).mean()
        loss.backward()
        opt.step()
        history.append(float(loss.detach()))
    return history
