"""Named-tensor container and the on-disk checkpoint format.

A checkpoint directory holds manifest.json plus one raw little-endian tensor
file.  Each manifest entry maps a tensor name to dtype, shape, file, byte
offset, the owning spec hash and the epoch; round-trips are bit-exact.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass, field

import numpy as np
import torch

from ..errors import CheckpointError
from .spec import NetworkSpec

MANIFEST_NAME = "manifest.json"
TENSOR_FILE = "tensors.bin"
FORMAT_VERSION = 1

_DTYPES = {"<f8", "<f4", "<i8", "<i4", "|u1"}


@dataclass
class ParameterSet:
    """Named tensors plus bookkeeping metadata (epoch, seed, spec hash)."""

    tensors: dict[str, np.ndarray]
    spec_hash: str
    epoch: int = 0
    seed: int | None = None
    meta: dict = field(default_factory=dict)

    @classmethod
    def from_module(cls, module, spec_hash: str, epoch: int = 0, seed: int | None = None,
                    meta: dict | None = None) -> "ParameterSet":
        tensors = {
            name: tensor.detach().cpu().numpy().copy()
            for name, tensor in module.state_dict().items()
        }
        return cls(tensors=tensors, spec_hash=spec_hash, epoch=epoch, seed=seed,
                   meta=dict(meta or {}))

    def load_into_module(self, module) -> None:
        state = module.state_dict()
        if set(state) != set(self.tensors):
            missing = set(state) - set(self.tensors)
            extra = set(self.tensors) - set(state)
            raise CheckpointError(f"tensor name mismatch (missing {sorted(missing)[:3]}, "
                                  f"unexpected {sorted(extra)[:3]})")
        converted = {}
        for name, current in state.items():
            arr = self.tensors[name]
            if tuple(arr.shape) != tuple(current.shape):
                raise CheckpointError(f"{name}: shape {arr.shape} != expected {tuple(current.shape)}")
            converted[name] = torch.from_numpy(arr.copy()).to(current.dtype)
        module.load_state_dict(converted)

    def equals(self, other: "ParameterSet") -> bool:
        if set(self.tensors) != set(other.tensors):
            return False
        return all(
            a.dtype == other.tensors[k].dtype and np.array_equal(a, other.tensors[k])
            for k, a in self.tensors.items()
        )


def _canonical_dtype(arr: np.ndarray) -> str:
    kind = arr.dtype.kind
    if kind == "f":
        return "<f8" if arr.dtype.itemsize == 8 else "<f4"
    if kind == "i":
        return "<i8" if arr.dtype.itemsize == 8 else "<i4"
    if kind == "u" and arr.dtype.itemsize == 1:
        return "|u1"
    if kind == "b":
        return "|u1"
    raise CheckpointError(f"unsupported tensor dtype {arr.dtype}")


def save_parameter_set(params: ParameterSet, path) -> None:
    """Write manifest.json + tensors.bin atomically into directory ``path``."""
    os.makedirs(path, exist_ok=True)
    entries = {}
    offset = 0
    chunks = []
    for name in sorted(params.tensors):
        arr = params.tensors[name]
        dtype = _canonical_dtype(arr)
        raw = np.ascontiguousarray(arr).astype(dtype, copy=False).tobytes()
        entries[name] = {
            "dtype": dtype,
            "shape": list(arr.shape),
            "file": TENSOR_FILE,
            "offset": offset,
            "nbytes": len(raw),
            "spec_hash": params.spec_hash,
            "epoch": params.epoch,
        }
        chunks.append(raw)
        offset += len(raw)
    manifest = {
        "format": FORMAT_VERSION,
        "spec_hash": params.spec_hash,
        "epoch": params.epoch,
        "seed": params.seed,
        "meta": params.meta,
        "tensors": entries,
    }
    _atomic_write(os.path.join(path, TENSOR_FILE), b"".join(chunks))
    _atomic_write(os.path.join(path, MANIFEST_NAME),
                  json.dumps(manifest, indent=1, sort_keys=True).encode())


def load_parameter_set(path, expected_spec: NetworkSpec | str | None = None) -> ParameterSet:
    """Read a checkpoint directory; verify the spec hash when one is expected."""
    manifest_path = os.path.join(path, MANIFEST_NAME)
    if not os.path.isfile(manifest_path):
        raise CheckpointError(f"no {MANIFEST_NAME} in {path}")
    try:
        with open(manifest_path, "rb") as fh:
            manifest = json.loads(fh.read())
    except (OSError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"unreadable manifest in {path}: {exc}") from exc
    if manifest.get("format") != FORMAT_VERSION:
        raise CheckpointError(f"unsupported checkpoint format {manifest.get('format')!r}")

    if expected_spec is not None:
        expected_hash = (expected_spec.spec_hash()
                         if isinstance(expected_spec, NetworkSpec) else expected_spec)
        if manifest["spec_hash"] != expected_hash:
            raise CheckpointError(
                f"spec hash mismatch: checkpoint {manifest['spec_hash'][:12]} != "
                f"expected {expected_hash[:12]}")

    blobs: dict[str, bytes] = {}
    tensors: dict[str, np.ndarray] = {}
    for name, entry in manifest["tensors"].items():
        if entry["dtype"] not in _DTYPES:
            raise CheckpointError(f"{name}: unknown dtype {entry['dtype']!r}")
        fname = entry["file"]
        if fname not in blobs:
            fpath = os.path.join(path, fname)
            try:
                with open(fpath, "rb") as fh:
                    blobs[fname] = fh.read()
            except OSError as exc:
                raise CheckpointError(f"missing tensor file {fpath}") from exc
        raw = blobs[fname][entry["offset"]: entry["offset"] + entry["nbytes"]]
        if len(raw) != entry["nbytes"]:
            raise CheckpointError(f"{name}: tensor file truncated")
        arr = np.frombuffer(raw, dtype=entry["dtype"]).reshape(entry["shape"]).copy()
        if arr.nbytes != entry["nbytes"]:
            raise CheckpointError(f"{name}: byte count does not match shape")
        tensors[name] = arr
    return ParameterSet(
        tensors=tensors,
        spec_hash=manifest["spec_hash"],
        epoch=manifest["epoch"],
        seed=manifest.get("seed"),
        meta=manifest.get("meta", {}),
    )


def save_network(module, spec: NetworkSpec, path, epoch: int = 0, seed: int | None = None,
                 meta: dict | None = None) -> ParameterSet:
    """Snapshot a compiled network (parameters + buffers) plus its spec JSON."""
    params = ParameterSet.from_module(module, spec.spec_hash(), epoch=epoch, seed=seed, meta=meta)
    save_parameter_set(params, path)
    _atomic_write(os.path.join(path, "spec.json"), spec.to_json().encode())
    return params


def load_network_spec(path) -> NetworkSpec:
    spec_path = os.path.join(path, "spec.json")
    try:
        with open(spec_path, "rb") as fh:
            spec = NetworkSpec.from_json(fh.read().decode())
    except OSError as exc:
        raise CheckpointError(f"missing spec.json in {path}") from exc
    manifest_path = os.path.join(path, MANIFEST_NAME)
    if os.path.isfile(manifest_path):
        with open(manifest_path, "rb") as fh:
            manifest = json.loads(fh.read())
        if manifest["spec_hash"] != spec.spec_hash():
            raise CheckpointError(f"spec.json in {path} does not match manifest spec hash")
    return spec


def _atomic_write(path, data: bytes) -> None:
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
