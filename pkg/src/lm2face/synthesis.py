"""Loading trained generators and running landmark-to-face synthesis."""

from __future__ import annotations

import os

import numpy as np
import torch

from .errors import CheckpointError
from .heatmap import DEFAULT_SIGMA_PX, render_heatmap
from .images import FaceImage
from .networks import compile_network, load_network_spec, load_parameter_set
from .networks.compile import CompiledNetwork


def load_generator(checkpoint_path) -> CompiledNetwork:
    """Load a generator from a training checkpoint directory (or directly
    from a single-network directory)."""
    gen_dir = os.path.join(checkpoint_path, "generator")
    if not os.path.isdir(gen_dir):
        gen_dir = checkpoint_path
    spec = load_network_spec(gen_dir)
    net = compile_network(spec, init="gan", seed=0)
    load_parameter_set(gen_dir, spec).load_into_module(net)
    net.eval()
    return net


def heatmap_batch(landmark_sets, size: int, sigma_px: float) -> torch.Tensor:
    maps = [render_heatmap(lm, size=size, sigma_px=sigma_px).data for lm in landmark_sets]
    return torch.from_numpy(np.stack(maps).astype(np.float32)[:, None])


def synthesize_faces(net: CompiledNetwork, landmark_sets,
                     sigma_px: float = DEFAULT_SIGMA_PX,
                     batch_size: int = 16) -> list[FaceImage]:
    """Render heatmaps and run the generator in eval mode (deterministic)."""
    size = net.spec.input_shape[1]
    sets = list(landmark_sets)
    faces: list[FaceImage] = []
    net.eval()
    for lo in range(0, len(sets), batch_size):
        batch = heatmap_batch(sets[lo:lo + batch_size], size, sigma_px)
        with torch.no_grad():
            out = net(batch)
        if not torch.isfinite(out).all():
            raise CheckpointError("generator produced non-finite output")
        for img in out.numpy():
            faces.append(FaceImage(data=np.clip(img, -1.0, 1.0)))
    return faces
