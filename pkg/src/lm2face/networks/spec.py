"""Declarative network descriptions with build-time shape checking.

A NetworkSpec is an ordered list of layer descriptors plus optional skip
edges.  Shape inference over the descriptor list produces the layer ledger
used by the architecture tests; any channel or resolution mismatch is a
BuildError naming the first inconsistent layer.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, asdict
from typing import Optional

from ..errors import BuildError

LAYER_KINDS = frozenset({
    "conv", "transposed-conv", "max-pool", "avg-pool", "batch-norm",
    "relu", "leaky-relu", "tanh", "sigmoid", "dense-block", "transition",
    "concat", "add", "global-pool", "affine",
})

_SHAPE_PRESERVING = frozenset({"batch-norm", "relu", "leaky-relu", "tanh", "sigmoid"})


@dataclass(frozen=True)
class DenseBlockSpec:
    """Concatenative block of bottleneck layers (1x1 to factor*k, then 3x3 to k)."""

    n_layers: int
    growth: int
    bottleneck_factor: int = 4
    compress_to: Optional[int] = None

    def __post_init__(self):
        if self.n_layers < 1:
            raise BuildError("dense block needs n_layers >= 1")
        if self.growth < 1 or self.bottleneck_factor < 1:
            raise BuildError("dense block growth and bottleneck factor must be >= 1")

    def out_channels(self, in_channels: int) -> int:
        grown = in_channels + self.n_layers * self.growth
        return self.compress_to if self.compress_to is not None else grown


@dataclass(frozen=True)
class LayerSpec:
    """One layer descriptor; unused fields stay None."""

    kind: str
    name: str
    out_channels: Optional[int] = None
    kernel: Optional[int] = None
    stride: Optional[int] = None
    pad: Optional[int] = None
    slope: Optional[float] = None          # leaky-relu
    bias: bool = True
    dense: Optional[DenseBlockSpec] = None
    up: bool = False                       # transition direction

    def __post_init__(self):
        if self.kind not in LAYER_KINDS:
            raise BuildError(f"unknown layer kind {self.kind!r} ({self.name})")


@dataclass(frozen=True)
class SkipEdge:
    """Merge the saved output of ``source`` into the output of ``target``."""

    source: str
    target: str
    merge: str = "add"

    def __post_init__(self):
        if self.merge not in ("add", "concat"):
            raise BuildError(f"skip merge must be add or concat, got {self.merge!r}")


@dataclass(frozen=True)
class LedgerRow:
    name: str
    kind: str
    channels: int
    height: int
    width: int


@dataclass(frozen=True)
class NetworkSpec:
    name: str
    input_shape: tuple[int, int, int]      # (C, H, W)
    layers: tuple[LayerSpec, ...]
    skip_edges: tuple[SkipEdge, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        object.__setattr__(self, "skip_edges", tuple(self.skip_edges))
        names = [l.name for l in self.layers]
        if len(set(names)) != len(names):
            raise BuildError(f"duplicate layer names in {self.name}")
        self.shape_ledger()  # validate at construction

    def layer(self, name: str) -> LayerSpec:
        for l in self.layers:
            if l.name == name:
                return l
        raise KeyError(name)

    def shape_ledger(self) -> list[LedgerRow]:
        """Infer (channels, height, width) after every layer."""
        by_target = {e.target: e for e in self.skip_edges}
        names = {l.name for l in self.layers}
        for e in self.skip_edges:
            if e.source not in names or e.target not in names:
                raise BuildError(f"{self.name}: skip edge {e.source}->{e.target} names unknown layer")
        c, h, w = self.input_shape
        rows: list[LedgerRow] = []
        saved: dict[str, tuple[int, int, int]] = {}
        sources = {e.source for e in self.skip_edges}
        seen = set()
        for l in self.layers:
            c, h, w = self._apply(l, c, h, w)
            edge = by_target.get(l.name)
            if edge is not None:
                if edge.source not in saved:
                    raise BuildError(
                        f"{self.name}: skip source {edge.source} not upstream of {edge.target}")
                sc, sh, sw = saved[edge.source]
                if edge.merge == "add":
                    if (sc, sh, sw) != (c, h, w):
                        raise BuildError(
                            f"{self.name}: additive skip {edge.source}->{edge.target} "
                            f"shape mismatch {(sc, sh, sw)} vs {(c, h, w)}")
                else:
                    if (sh, sw) != (h, w):
                        raise BuildError(
                            f"{self.name}: concat skip {edge.source}->{edge.target} "
                            f"spatial mismatch {(sh, sw)} vs {(h, w)}")
                    c += sc
            if l.name in sources:
                saved[l.name] = (c, h, w)
            rows.append(LedgerRow(l.name, l.kind, c, h, w))
            seen.add(l.name)
        return rows

    def _apply(self, l: LayerSpec, c: int, h: int, w: int) -> tuple[int, int, int]:
        def need(value, what):
            if value is None:
                raise BuildError(f"{self.name}: layer {l.name} ({l.kind}) missing {what}")
            return value

        if l.kind in _SHAPE_PRESERVING:
            return c, h, w
        if l.kind == "conv":
            k = need(l.kernel, "kernel")
            s = l.stride or 1
            p = l.pad or 0
            oh = (h + 2 * p - k) // s + 1
            ow = (w + 2 * p - k) // s + 1
            if oh < 1 or ow < 1:
                raise BuildError(f"{self.name}: layer {l.name} collapses {h}x{w} to {oh}x{ow}")
            return need(l.out_channels, "out_channels"), oh, ow
        if l.kind == "transposed-conv":
            k = need(l.kernel, "kernel")
            s = l.stride or 1
            p = l.pad or 0
            return need(l.out_channels, "out_channels"), (h - 1) * s - 2 * p + k, (w - 1) * s - 2 * p + k
        if l.kind in ("max-pool", "avg-pool"):
            k = need(l.kernel, "kernel")
            s = l.stride or k
            p = l.pad or 0
            return c, (h + 2 * p - k) // s + 1, (w + 2 * p - k) // s + 1
        if l.kind == "dense-block":
            return need(l.dense, "dense spec").out_channels(c), h, w
        if l.kind == "transition":
            oc = need(l.out_channels, "out_channels")
            if l.up:
                return oc, 2 * h, 2 * w
            if h % 2 or w % 2:
                raise BuildError(f"{self.name}: layer {l.name} pools odd size {h}x{w}")
            return oc, h // 2, w // 2
        if l.kind == "global-pool":
            return c, 1, 1
        if l.kind == "affine":
            if (h, w) != (1, 1):
                raise BuildError(f"{self.name}: layer {l.name} needs 1x1 spatial input, got {h}x{w}")
            return need(l.out_channels, "out_channels"), 1, 1
        raise BuildError(f"{self.name}: layer kind {l.kind!r} not supported in shape inference")

    _SIGNATURE_TOKENS = {
        "conv": "C", "max-pool": "M", "dense-block": "D",
    }

    def channel_signature(self) -> str:
        """Compact architecture string: one token per structural layer.

        conv -> C(out), max-pool -> M(channels), dense-block -> D(out),
        transition -> T(out) down / DT(out) up.  Activation and norm layers
        are not tokens.
        """
        tokens = []
        for row, l in zip(self.shape_ledger(), self.layers):
            if l.kind in self._SIGNATURE_TOKENS:
                tokens.append(f"{self._SIGNATURE_TOKENS[l.kind]}({row.channels})")
            elif l.kind == "transition":
                tokens.append(f"{'DT' if l.up else 'T'}({row.channels})")
        return "-".join(tokens)

    def output_shape(self) -> tuple[int, int, int]:
        row = self.shape_ledger()[-1]
        return row.channels, row.height, row.width

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "NetworkSpec":
        obj = json.loads(text)
        layers = []
        for l in obj["layers"]:
            dense = l.pop("dense", None)
            layers.append(LayerSpec(**l, dense=DenseBlockSpec(**dense) if dense else None))
        return cls(
            name=obj["name"],
            input_shape=tuple(obj["input_shape"]),
            layers=tuple(layers),
            skip_edges=tuple(SkipEdge(**e) for e in obj["skip_edges"]),
        )

    def spec_hash(self) -> str:
        return hashlib.sha256(self.to_json().encode()).hexdigest()
