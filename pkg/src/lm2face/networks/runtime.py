"""Runtime wrappers: functional forward, the perceptual feature extractor and
the gender classifier scoring pipeline."""

from __future__ import annotations

import os

import numpy as np
import torch
import torch.nn.functional as F

from ..errors import CheckpointError, ValidationError
from ..images import FaceImage
from .build import (
    ClassifierConfig,
    FeatureExtractorConfig,
    build_feature_extractor,
    build_gender_classifier,
    classifier_backbone_layer_names,
)
from .compile import CompiledNetwork, compile_network, freeze_layers
from .params import ParameterSet, load_parameter_set
from .spec import NetworkSpec

# pseudo spec hash identifying the shared conv-backbone weight asset
BACKBONE_ASSET_HASH = "vgg16-conv-v1"

_IMAGENET_MEAN = (0.485, 0.456, 0.406)
_IMAGENET_STD = (0.229, 0.224, 0.225)


def forward(spec: NetworkSpec, params: ParameterSet, x: torch.Tensor,
            train: bool = False) -> torch.Tensor:
    """Functional forward pass: compile the spec, bind the parameter set, run.

    Eval mode (the default) is deterministic for fixed parameters and input.
    """
    net = compile_network(spec, init="gan", seed=0)
    params.load_into_module(net)
    return run_network(net, x, train=train)


def run_network(net: CompiledNetwork, x: torch.Tensor, train: bool = False) -> torch.Tensor:
    if x.ndim != 4:
        raise ValidationError(f"network input must be NCHW, got shape {tuple(x.shape)}")
    expected = net.spec.input_shape
    if tuple(x.shape[1:]) != tuple(expected):
        raise ValidationError(f"input shape {tuple(x.shape[1:])} != spec {tuple(expected)}")
    net.train(train)
    if train:
        return net(x)
    with torch.no_grad():
        return net(x)


def faces_to_tensor(faces, dtype=torch.float32) -> torch.Tensor:
    """Stack FaceImage objects (or arrays in [-1, 1]) into an NCHW tensor."""
    arrays = [f.data if isinstance(f, FaceImage) else np.asarray(f, dtype=np.float32)
              for f in faces]
    return torch.from_numpy(np.stack(arrays)).to(dtype)


def imagenet_preprocess(x: torch.Tensor, size: int) -> torch.Tensor:
    """Map a [-1, 1] image batch to ImageNet-normalized ``size`` x ``size``."""
    if size != x.shape[-1]:
        x = F.interpolate(x, size=(size, size), mode="bilinear", align_corners=False)
    x = (x + 1.0) * 0.5
    mean = torch.tensor(_IMAGENET_MEAN, dtype=x.dtype, device=x.device).view(1, 3, 1, 1)
    std = torch.tensor(_IMAGENET_STD, dtype=x.dtype, device=x.device).view(1, 3, 1, 1)
    return (x - mean) / std


def load_backbone_weights(net: CompiledNetwork, asset_path) -> None:
    """Copy conv weights from a shared backbone asset into matching layers."""
    if not os.path.isdir(asset_path):
        raise CheckpointError(f"backbone weight asset not found at {asset_path}")
    params = load_parameter_set(asset_path, expected_spec=BACKBONE_ASSET_HASH)
    with torch.no_grad():
        for name, arr in params.tensors.items():
            layer, _, attr = name.rpartition(".")
            if layer not in net.layers:
                continue
            target = getattr(net.layers[layer], attr, None)
            if target is None:
                raise CheckpointError(f"backbone asset tensor {name} has no destination")
            if tuple(target.shape) != tuple(arr.shape):
                raise CheckpointError(
                    f"backbone asset tensor {name}: shape {arr.shape} != {tuple(target.shape)}")
            target.copy_(torch.from_numpy(arr.copy()))


class FeatureExtractor:
    """Frozen deep-feature network for the perceptual loss."""

    def __init__(self, spec: NetworkSpec, net: CompiledNetwork, config: FeatureExtractorConfig):
        self.spec = spec
        self.net = net
        self.config = config
        self.net.eval()
        for p in self.net.parameters():
            p.requires_grad_(False)

    @classmethod
    def create(cls, config: FeatureExtractorConfig | None = None,
               weights_path=None, seed: int = 0) -> "FeatureExtractor":
        cfg = config or FeatureExtractorConfig()
        spec = build_feature_extractor(cfg)
        net = compile_network(spec, init="default", seed=seed)
        if weights_path is not None:
            load_backbone_weights(net, weights_path)
        return cls(spec, net, cfg)

    def __call__(self, images: torch.Tensor) -> torch.Tensor:
        """Feature tensor for a [-1, 1] NCHW batch; gradients flow to the input."""
        x = imagenet_preprocess(images, self.config.input_size)
        return self.net(x)


def perceptual_features(extractor: FeatureExtractor, faces) -> torch.Tensor:
    """Deep features of a FaceImage batch (no gradient tracking)."""
    with torch.no_grad():
        return extractor(faces_to_tensor(faces))


class GenderClassifier:
    """Conv backbone + pooled two-layer head emitting P(male) in (0, 1)."""

    def __init__(self, spec: NetworkSpec, net: CompiledNetwork, config: ClassifierConfig):
        self.spec = spec
        self.net = net
        self.config = config
        if config.freeze_backbone:
            freeze_layers(net, classifier_backbone_layer_names(spec))

    @classmethod
    def create(cls, config: ClassifierConfig | None = None,
               weights_path=None, seed: int = 0) -> "GenderClassifier":
        cfg = config or ClassifierConfig()
        spec = build_gender_classifier(cfg)
        net = compile_network(spec, init="default", seed=seed)
        if weights_path is not None:
            load_backbone_weights(net, weights_path)
        return cls(spec, net, cfg)

    def score(self, images: torch.Tensor) -> torch.Tensor:
        """P(male) per image for a [-1, 1] NCHW batch (any resolution; the
        batch is resampled to the classifier's input size)."""
        x = imagenet_preprocess(images, self.config.input_size)
        return self.net(x).flatten(1).squeeze(1)

    def backbone_features(self, images: torch.Tensor) -> torch.Tensor:
        """Pooled backbone features (N, C), detached; used for head training."""
        x = imagenet_preprocess(images, self.config.input_size)
        with torch.no_grad():
            for name, module in self.net.layers.items():
                x = module(x)
                if name == "gap":
                    break
        return x.flatten(1)

    def head_parameters(self):
        names = classifier_backbone_layer_names(self.spec)
        for layer_name, module in self.net.layers.items():
            if layer_name not in names:
                yield from module.parameters()

    def score_from_features(self, feats: torch.Tensor) -> torch.Tensor:
        """Head-only score for cached pooled features (training shortcut)."""
        x = feats.unsqueeze(-1).unsqueeze(-1)
        started = False
        for name, module in self.net.layers.items():
            if name == "gap":
                started = True
                continue
            if started:
                x = module(x)
        return x.flatten(1).squeeze(1)
