"""Builders for the four networks: generator, patch discriminator, gender
classifier and the perceptual feature extractor.

The generator is a dense-block encoder/decoder with three additive long
skip connections.  The default configuration reproduces the reference
19-entry channel schedule

    C(64)-M(64)-D(256)-T(128)-D(512)-T(256)-D(1024)-T(512)-D(1024)-
    DT(256)-D(512)-DT(128)-D(256)-DT(64)-D(64)-D(32)-D(32)-DT(16)-C(3)

which the build asserts layer by layer.  Reduced presets with the same
topology exist for CPU-budget training runs and unit tests.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from ..errors import BuildError
from .spec import DenseBlockSpec, LayerSpec, NetworkSpec, SkipEdge

REFERENCE_SIGNATURE = (
    "C(64)-M(64)-D(256)-T(128)-D(512)-T(256)-D(1024)-T(512)-D(1024)-"
    "DT(256)-D(512)-DT(128)-D(256)-DT(64)-D(64)-D(32)-D(32)-DT(16)-C(3)"
)


@dataclass(frozen=True)
class GeneratorConfig:
    in_channels: int = 1
    out_channels: int = 3
    input_size: int = 64
    stem_channels: int = 64
    growth: int = 32
    bottleneck_factor: int = 4
    encoder_blocks: tuple[int, ...] = (6, 12, 24, 16)
    transition_channels: tuple[int, ...] = (128, 256, 512)
    decoder_up_channels: tuple[int, ...] = (256, 128, 64)
    decoder_blocks: tuple[int, ...] = (8, 4)
    tail_blocks: tuple[tuple[int, int], ...] = ((2, 64), (2, 32), (2, 32))
    final_up_channels: int = 16


GENERATOR_PRESETS = {
    "paper": GeneratorConfig(),
    "small": GeneratorConfig(
        stem_channels=16,
        growth=8,
        encoder_blocks=(2, 2, 2, 2),
        transition_channels=(16, 24, 32),
        decoder_up_channels=(24, 16, 16),
        decoder_blocks=(2, 2),
        tail_blocks=((2, 16),),
        final_up_channels=8,
    ),
    "tiny": GeneratorConfig(
        stem_channels=4,
        growth=2,
        bottleneck_factor=2,
        encoder_blocks=(1, 1, 1, 1),
        transition_channels=(4, 6, 8),
        decoder_up_channels=(6, 4, 4),
        decoder_blocks=(1, 1),
        tail_blocks=((1, 4),),
        final_up_channels=4,
    ),
}


def generator_config(preset: str = "paper", **overrides) -> GeneratorConfig:
    if preset not in GENERATOR_PRESETS:
        raise BuildError(f"unknown generator preset {preset!r}")
    return replace(GENERATOR_PRESETS[preset], **overrides)


def build_generator(config: GeneratorConfig | None = None) -> NetworkSpec:
    """Assemble the encoder/decoder generator spec and verify its ledger."""
    cfg = config or GeneratorConfig()
    if len(cfg.transition_channels) != len(cfg.encoder_blocks) - 1:
        raise BuildError("need one down transition between consecutive encoder blocks")
    if len(cfg.decoder_up_channels) != len(cfg.transition_channels):
        raise BuildError("need one up transition per down transition")
    if len(cfg.decoder_blocks) != len(cfg.decoder_up_channels) - 1:
        raise BuildError("need one decoder block between consecutive up transitions")
    # additive long skips require matching channel counts
    if cfg.decoder_up_channels[-1] != cfg.stem_channels:
        raise BuildError("last up transition must match stem channels for the additive skip")
    for down, up in zip(cfg.transition_channels[:-1], reversed(cfg.decoder_up_channels[:-1])):
        if down != up:
            raise BuildError(f"skip pair T({down}) / DT({up}) must have equal channels")

    def dense(n, compress=None):
        return DenseBlockSpec(n_layers=n, growth=cfg.growth,
                              bottleneck_factor=cfg.bottleneck_factor, compress_to=compress)

    layers = [
        LayerSpec("conv", "stem", out_channels=cfg.stem_channels, kernel=3, stride=1, pad=1),
        LayerSpec("batch-norm", "stem_bn"),
        LayerSpec("relu", "stem_relu"),
        LayerSpec("max-pool", "pool", kernel=2, stride=2),
    ]
    for i, n in enumerate(cfg.encoder_blocks):
        layers.append(LayerSpec("dense-block", f"enc{i + 1}", dense=dense(n)))
        if i < len(cfg.transition_channels):
            layers.append(LayerSpec("transition", f"down{i + 1}",
                                    out_channels=cfg.transition_channels[i]))
    for i, ch in enumerate(cfg.decoder_up_channels):
        layers.append(LayerSpec("transition", f"up{i + 1}", out_channels=ch, up=True))
        if i < len(cfg.decoder_blocks):
            layers.append(LayerSpec("dense-block", f"dec{i + 1}", dense=dense(cfg.decoder_blocks[i])))
    for i, (n, compress) in enumerate(cfg.tail_blocks):
        layers.append(LayerSpec("dense-block", f"tail{i + 1}", dense=dense(n, compress=compress)))
    layers += [
        LayerSpec("transition", "up_out", out_channels=cfg.final_up_channels, up=True),
        LayerSpec("conv", "head", out_channels=cfg.out_channels, kernel=3, stride=1, pad=1),
        LayerSpec("tanh", "head_tanh"),
    ]

    n_up = len(cfg.decoder_up_channels)
    skips = [SkipEdge(source="pool", target=f"up{n_up}", merge="add")]
    skips += [
        SkipEdge(source=f"down{i + 1}", target=f"up{n_up - 1 - i}", merge="add")
        for i in range(len(cfg.transition_channels) - 1)
    ]

    spec = NetworkSpec(
        name="generator",
        input_shape=(cfg.in_channels, cfg.input_size, cfg.input_size),
        layers=tuple(layers),
        skip_edges=tuple(skips),
    )
    out = spec.output_shape()
    expected = (cfg.out_channels, cfg.input_size, cfg.input_size)
    if out != expected:
        raise BuildError(f"generator output {out} != expected {expected}")
    return spec


@dataclass(frozen=True)
class DiscriminatorConfig:
    heatmap_channels: int = 1
    image_channels: int = 3
    input_size: int = 64
    channels: tuple[int, ...] = (64, 128, 256, 512)
    slope: float = 0.2


DISCRIMINATOR_PRESETS = {
    "paper": DiscriminatorConfig(),
    "small": DiscriminatorConfig(channels=(16, 24, 32, 48)),
    "tiny": DiscriminatorConfig(channels=(4, 6, 8, 8)),
}


def discriminator_config(preset: str = "paper", **overrides) -> DiscriminatorConfig:
    if preset not in DISCRIMINATOR_PRESETS:
        raise BuildError(f"unknown discriminator preset {preset!r}")
    return replace(DISCRIMINATOR_PRESETS[preset], **overrides)


def build_discriminator(config: DiscriminatorConfig | None = None) -> NetworkSpec:
    """Patch discriminator over heatmap+image concatenation, all 4x4 convs.

    Three stride-2 stages then two stride-1 stages; for 64x64 input the
    patch map is 6x6 (64 -> 32 -> 16 -> 8 -> 7 -> 6).
    """
    cfg = config or DiscriminatorConfig()
    c1, c2, c3, c4 = cfg.channels
    in_ch = cfg.heatmap_channels + cfg.image_channels
    layers = [
        LayerSpec("conv", "d1", out_channels=c1, kernel=4, stride=2, pad=1),
        LayerSpec("leaky-relu", "d1_act", slope=cfg.slope),
        LayerSpec("conv", "d2", out_channels=c2, kernel=4, stride=2, pad=1, bias=False),
        LayerSpec("batch-norm", "d2_bn"),
        LayerSpec("leaky-relu", "d2_act", slope=cfg.slope),
        LayerSpec("conv", "d3", out_channels=c3, kernel=4, stride=2, pad=1, bias=False),
        LayerSpec("batch-norm", "d3_bn"),
        LayerSpec("leaky-relu", "d3_act", slope=cfg.slope),
        LayerSpec("conv", "d4", out_channels=c4, kernel=4, stride=1, pad=1, bias=False),
        LayerSpec("batch-norm", "d4_bn"),
        LayerSpec("leaky-relu", "d4_act", slope=cfg.slope),
        LayerSpec("conv", "d5", out_channels=1, kernel=4, stride=1, pad=1),
        LayerSpec("sigmoid", "d5_act"),
    ]
    return NetworkSpec(
        name="discriminator",
        input_shape=(in_ch, cfg.input_size, cfg.input_size),
        layers=tuple(layers),
    )


# VGG-16 convolutional schedule: (block, convs, channels)
_VGG16_STAGES = ((1, 2, 64), (2, 2, 128), (3, 3, 256), (4, 3, 512), (5, 3, 512))


def _vgg16_conv_layers(through: str | None = None) -> list[LayerSpec]:
    """The 13-conv / 5-pool VGG-16 feature stack, optionally truncated just
    after the named activation (e.g. "conv4_3")."""
    layers: list[LayerSpec] = []
    for block, convs, ch in _VGG16_STAGES:
        for i in range(1, convs + 1):
            name = f"conv{block}_{i}"
            layers.append(LayerSpec("conv", name, out_channels=ch, kernel=3, stride=1, pad=1))
            layers.append(LayerSpec("relu", f"{name}_relu"))
            if through == name:
                return layers
        layers.append(LayerSpec("max-pool", f"pool{block}", kernel=2, stride=2))
    if through is not None:
        raise BuildError(f"no VGG-16 conv named {through!r}")
    return layers


@dataclass(frozen=True)
class ClassifierConfig:
    backbone: str = "vgg16"        # "vgg16" or "tiny"
    input_size: int = 224
    head_width: int = 512
    freeze_backbone: bool = True


CLASSIFIER_PRESETS = {
    "paper": ClassifierConfig(),
    "tiny": ClassifierConfig(backbone="tiny", input_size=64, head_width=16),
}


def classifier_config(preset: str = "paper", **overrides) -> ClassifierConfig:
    if preset not in CLASSIFIER_PRESETS:
        raise BuildError(f"unknown classifier preset {preset!r}")
    return replace(CLASSIFIER_PRESETS[preset], **overrides)


def build_gender_classifier(config: ClassifierConfig | None = None) -> NetworkSpec:
    """Binary gender classifier: conv backbone, global average pooling and a
    two-layer head ending in a sigmoid P(male)."""
    cfg = config or ClassifierConfig()
    if cfg.backbone == "vgg16":
        layers = _vgg16_conv_layers()
    elif cfg.backbone == "tiny":
        layers = [
            LayerSpec("conv", "conv1", out_channels=8, kernel=3, stride=2, pad=1),
            LayerSpec("relu", "conv1_relu"),
            LayerSpec("conv", "conv2", out_channels=16, kernel=3, stride=2, pad=1),
            LayerSpec("relu", "conv2_relu"),
        ]
    else:
        raise BuildError(f"unknown classifier backbone {cfg.backbone!r}")
    layers += [
        LayerSpec("global-pool", "gap"),
        LayerSpec("affine", "head1", out_channels=cfg.head_width),
        LayerSpec("relu", "head1_relu"),
        LayerSpec("affine", "head2", out_channels=1),
        LayerSpec("sigmoid", "head_sigmoid"),
    ]
    return NetworkSpec(
        name="gender_classifier",
        input_shape=(3, cfg.input_size, cfg.input_size),
        layers=tuple(layers),
    )


def classifier_backbone_layer_names(spec: NetworkSpec) -> set[str]:
    """Layer names belonging to the classifier's backbone (everything before
    the global pool)."""
    names = set()
    for l in spec.layers:
        if l.kind == "global-pool":
            break
        names.add(l.name)
    return names


@dataclass(frozen=True)
class FeatureExtractorConfig:
    backbone: str = "vgg16"        # "vgg16" or "tiny"
    layer: str = "conv4_3"
    input_size: int = 224


FEATURE_PRESETS = {
    "paper": FeatureExtractorConfig(),
    "tiny": FeatureExtractorConfig(backbone="tiny", layer="conv1", input_size=64),
}


def build_feature_extractor(config: FeatureExtractorConfig | None = None) -> NetworkSpec:
    """Deep-feature extractor for the perceptual loss (VGG-16 through conv4_3:
    512 channels at 28x28 for 224 input)."""
    cfg = config or FeatureExtractorConfig()
    if cfg.backbone == "vgg16":
        layers = _vgg16_conv_layers(through=cfg.layer)
    elif cfg.backbone == "tiny":
        layers = [
            LayerSpec("conv", "conv1", out_channels=4, kernel=3, stride=2, pad=1),
            LayerSpec("relu", "conv1_relu"),
        ]
    else:
        raise BuildError(f"unknown feature backbone {cfg.backbone!r}")
    return NetworkSpec(
        name="feature_extractor",
        input_shape=(3, cfg.input_size, cfg.input_size),
        layers=tuple(layers),
    )
