"""Network definitions: declarative specs, builders, the torch compiler and
checkpoint I/O."""

from .spec import DenseBlockSpec, LayerSpec, LedgerRow, NetworkSpec, SkipEdge
from .build import (
    REFERENCE_SIGNATURE,
    ClassifierConfig,
    DiscriminatorConfig,
    FeatureExtractorConfig,
    GeneratorConfig,
    build_discriminator,
    build_feature_extractor,
    build_gender_classifier,
    build_generator,
    classifier_backbone_layer_names,
    classifier_config,
    discriminator_config,
    generator_config,
)
from .compile import (
    CompiledNetwork,
    compile_network,
    freeze_layers,
    init_weights,
    trainable_parameter_names,
)
from .params import (
    ParameterSet,
    load_network_spec,
    load_parameter_set,
    save_network,
    save_parameter_set,
)
from .runtime import forward, perceptual_features, run_network

__all__ = [name for name in dir() if not name.startswith("_")]
