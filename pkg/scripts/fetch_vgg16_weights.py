#!/usr/bin/env python3
"""Fetch pretrained VGG-16 convolutional weights and convert them into the
package's backbone asset format.

The asset feeds both the perceptual feature extractor and the gender
classifier backbone.  Sources, in order of preference:

  * --from-state-dict PATH : an existing torch state dict (.pth) with
    torchvision's vgg16 layout (features.N.weight / features.N.bias);
  * otherwise torchvision.models.vgg16(weights="IMAGENET1K_V1"), which
    downloads the weights if they are not cached.

Usage:
    python scripts/fetch_vgg16_weights.py --out assets/vgg16
"""

import argparse
import sys

import numpy as np
import torch

from lm2face.networks.params import ParameterSet, save_parameter_set
from lm2face.networks.runtime import BACKBONE_ASSET_HASH

# torchvision features index -> conv layer name
VGG16_FEATURE_MAP = {
    0: "conv1_1", 2: "conv1_2",
    5: "conv2_1", 7: "conv2_2",
    10: "conv3_1", 12: "conv3_2", 14: "conv3_3",
    17: "conv4_1", 19: "conv4_2", 21: "conv4_3",
    24: "conv5_1", 26: "conv5_2", 28: "conv5_3",
}


def convert(state_dict: dict) -> ParameterSet:
    tensors = {}
    for idx, name in VGG16_FEATURE_MAP.items():
        for attr in ("weight", "bias"):
            key = f"features.{idx}.{attr}"
            if key not in state_dict:
                raise SystemExit(f"state dict is missing {key}; not a VGG-16 checkpoint?")
            tensors[f"{name}.{attr}"] = state_dict[key].detach().cpu().numpy().astype(np.float32)
    return ParameterSet(tensors=tensors, spec_hash=BACKBONE_ASSET_HASH,
                        meta={"source": "vgg16-imagenet"})


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", required=True, help="asset output directory")
    parser.add_argument("--from-state-dict", help="existing vgg16 .pth file")
    args = parser.parse_args()

    if args.from_state_dict:
        state = torch.load(args.from_state_dict, map_location="cpu", weights_only=True)
    else:
        from torchvision.models import vgg16

        print("downloading vgg16 imagenet weights via torchvision ...", file=sys.stderr)
        state = vgg16(weights="IMAGENET1K_V1").state_dict()

    params = convert(state)
    save_parameter_set(params, args.out)
    print(f"wrote {len(params.tensors)} tensors to {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
