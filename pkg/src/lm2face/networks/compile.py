"""Compile a NetworkSpec into an executable torch module.

The compiled module evaluates layers in declaration order, stashing skip
sources and merging them into their targets.  Weight initialization comes in
two flavors: "gan" (convs N(0, 0.02), batch-norm scale N(1, 0.02), zero
biases) for the adversarial pair, and "default" (torch's standard init) for
backbone networks.
"""

from __future__ import annotations

import torch
from torch import nn

from ..errors import BuildError
from .spec import LayerSpec, NetworkSpec

BATCHNORM_EPS = 1e-5


class DenseBlock(nn.Module):
    """Concatenative growth: each step is BN-ReLU-1x1conv-BN-ReLU-3x3conv,
    its output appended to the running feature stack."""

    def __init__(self, in_channels: int, spec):
        super().__init__()
        self.steps = nn.ModuleList()
        ch = in_channels
        mid = spec.bottleneck_factor * spec.growth
        for _ in range(spec.n_layers):
            self.steps.append(nn.Sequential(
                nn.BatchNorm2d(ch, eps=BATCHNORM_EPS),
                nn.ReLU(inplace=True),
                nn.Conv2d(ch, mid, kernel_size=1, bias=False),
                nn.BatchNorm2d(mid, eps=BATCHNORM_EPS),
                nn.ReLU(inplace=True),
                nn.Conv2d(mid, spec.growth, kernel_size=3, padding=1, bias=False),
            ))
            ch += spec.growth
        if spec.compress_to is not None:
            self.compress = nn.Conv2d(ch, spec.compress_to, kernel_size=1, bias=False)
        else:
            self.compress = None

    def forward(self, x):
        for step in self.steps:
            x = torch.cat([x, step(x)], dim=1)
        if self.compress is not None:
            x = self.compress(x)
        return x


def _transition(in_channels: int, out_channels: int, up: bool) -> nn.Sequential:
    head = [nn.BatchNorm2d(in_channels, eps=BATCHNORM_EPS), nn.ReLU(inplace=True)]
    if up:
        head.append(nn.ConvTranspose2d(in_channels, out_channels, kernel_size=4,
                                       stride=2, padding=1, bias=False))
    else:
        head.append(nn.Conv2d(in_channels, out_channels, kernel_size=1, bias=False))
        head.append(nn.AvgPool2d(kernel_size=2, stride=2))
    return nn.Sequential(*head)


class _Affine(nn.Module):
    def __init__(self, in_features: int, out_features: int):
        super().__init__()
        self.linear = nn.Linear(in_features, out_features)

    def forward(self, x):
        return self.linear(x.flatten(1)).unsqueeze(-1).unsqueeze(-1)


def _make_layer(l: LayerSpec, in_channels: int) -> nn.Module:
    if l.kind == "conv":
        return nn.Conv2d(in_channels, l.out_channels, l.kernel,
                         stride=l.stride or 1, padding=l.pad or 0, bias=l.bias)
    if l.kind == "transposed-conv":
        return nn.ConvTranspose2d(in_channels, l.out_channels, l.kernel,
                                  stride=l.stride or 1, padding=l.pad or 0, bias=l.bias)
    if l.kind == "max-pool":
        return nn.MaxPool2d(l.kernel, stride=l.stride or l.kernel, padding=l.pad or 0)
    if l.kind == "avg-pool":
        return nn.AvgPool2d(l.kernel, stride=l.stride or l.kernel, padding=l.pad or 0)
    if l.kind == "batch-norm":
        return nn.BatchNorm2d(in_channels, eps=BATCHNORM_EPS)
    if l.kind == "relu":
        return nn.ReLU(inplace=False)
    if l.kind == "leaky-relu":
        return nn.LeakyReLU(l.slope if l.slope is not None else 0.2, inplace=False)
    if l.kind == "tanh":
        return nn.Tanh()
    if l.kind == "sigmoid":
        return nn.Sigmoid()
    if l.kind == "dense-block":
        return DenseBlock(in_channels, l.dense)
    if l.kind == "transition":
        return _transition(in_channels, l.out_channels, l.up)
    if l.kind == "global-pool":
        return nn.AdaptiveAvgPool2d(1)
    if l.kind == "affine":
        return _Affine(in_channels, l.out_channels)
    raise BuildError(f"layer kind {l.kind!r} has no torch implementation")


class CompiledNetwork(nn.Module):
    """Executable form of a NetworkSpec."""

    def __init__(self, spec: NetworkSpec):
        super().__init__()
        self.spec = spec
        ledger = spec.shape_ledger()
        in_ch = [spec.input_shape[0]] + [row.channels for row in ledger[:-1]]
        self.layers = nn.ModuleDict()
        for l, c_in in zip(spec.layers, in_ch):
            self.layers[l.name] = _make_layer(l, c_in)
        self._merge_at = {e.target: e for e in spec.skip_edges}
        self._sources = {e.source for e in spec.skip_edges}

    def forward(self, x):
        saved = {}
        for name, module in self.layers.items():
            x = module(x)
            edge = self._merge_at.get(name)
            if edge is not None:
                x = x + saved[edge.source] if edge.merge == "add" else torch.cat(
                    [x, saved[edge.source]], dim=1)
            if name in self._sources:
                saved[name] = x
        return x

    def output_is_flat(self) -> bool:
        return self.spec.output_shape()[1:] == (1, 1)


def init_weights(module: nn.Module, scheme: str = "gan", seed: int | None = None) -> None:
    """Initialize in place. "gan": N(0, 0.02) convs / N(1, 0.02) batch-norm
    scales / zero biases; "default": torch's standard init, reseeded."""
    if seed is not None:
        torch.manual_seed(seed)
    if scheme == "default":
        for m in module.modules():
            if hasattr(m, "reset_parameters"):
                m.reset_parameters()
        return
    if scheme != "gan":
        raise BuildError(f"unknown init scheme {scheme!r}")
    for m in module.modules():
        if isinstance(m, (nn.Conv2d, nn.ConvTranspose2d, nn.Linear)):
            nn.init.normal_(m.weight, 0.0, 0.02)
            if m.bias is not None:
                nn.init.zeros_(m.bias)
        elif isinstance(m, nn.BatchNorm2d):
            nn.init.normal_(m.weight, 1.0, 0.02)
            nn.init.zeros_(m.bias)


def compile_network(spec: NetworkSpec, init: str = "gan", seed: int | None = None,
                    dtype: torch.dtype = torch.float32) -> CompiledNetwork:
    net = CompiledNetwork(spec)
    init_weights(net, scheme=init, seed=seed)
    return net.to(dtype)


def freeze_layers(net: CompiledNetwork, layer_names) -> None:
    """Turn off gradients (and batch-norm stat updates) for named layers."""
    for name in layer_names:
        module = net.layers[name]
        for p in module.parameters():
            p.requires_grad_(False)
        module.eval()


def trainable_parameter_names(net: nn.Module) -> list[str]:
    return [n for n, p in net.named_parameters() if p.requires_grad]
