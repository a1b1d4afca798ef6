"""HTTP inference service: synthesize faces from posted landmarks, score
gender, serve landmark templates and the editor's static bundle.

Stateless JSON over HTTP.  Handlers run against an immutable model snapshot;
loading a new checkpoint swaps the snapshot atomically between requests.
"""

from __future__ import annotations

import base64
import json
import logging
import mimetypes
import os
import threading
import time
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import numpy as np
import torch

from .errors import CheckpointError, ValidationError
from .heatmap import DEFAULT_SIGMA_PX, render_heatmap
from .landmarks import TEMPLATE_NAMES, LandmarkSet, template
from .networks import load_parameter_set
from .networks.runtime import GenderClassifier, faces_to_tensor
from .networks.build import classifier_config
from .networks.compile import CompiledNetwork
from .networks.params import load_network_spec
from .synthesis import load_generator, synthesize_faces

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ModelSnapshot:
    """Read-only bundle the request handlers work against."""

    generator: CompiledNetwork
    classifier: GenderClassifier
    checkpoint_hash: str
    checkpoint_path: str


def load_snapshot(checkpoint_path) -> ModelSnapshot:
    generator = load_generator(checkpoint_path)
    gen_dir = os.path.join(checkpoint_path, "generator")
    if not os.path.isdir(gen_dir):
        gen_dir = checkpoint_path
    params = load_parameter_set(gen_dir)
    clf_dir = os.path.join(checkpoint_path, "classifier")
    if os.path.isdir(clf_dir):
        spec = load_network_spec(clf_dir)
        preset = "paper" if spec.input_shape[1] == 224 else "tiny"
        classifier = GenderClassifier.create(classifier_config(preset),
                                             seed=params.seed or 0)
        load_parameter_set(clf_dir, spec).load_into_module(classifier.net)
    else:
        # fixture checkpoints carry no classifier; a seeded tiny classifier
        # keeps gender scores deterministic
        classifier = GenderClassifier.create(classifier_config("tiny"),
                                             seed=params.seed or 0)
    classifier.net.eval()
    return ModelSnapshot(
        generator=generator,
        classifier=classifier,
        checkpoint_hash=params.spec_hash,
        checkpoint_path=str(checkpoint_path),
    )


def _parse_synthesis_request(body: dict) -> tuple[LandmarkSet, float | None, bool]:
    if not isinstance(body, dict):
        raise ValidationError("request body must be a JSON object")
    points = body.get("landmarks")
    if points is None:
        raise ValidationError("field 'landmarks' is required")
    try:
        arr = np.asarray(points, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"field 'landmarks': not numeric: {exc}") from exc
    if arr.shape != (68, 2):
        raise ValidationError(f"field 'landmarks': expected 68 [x, y] pairs, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise ValidationError("field 'landmarks': coordinates must be finite")
    if arr.min() < 0.0 or arr.max() > 1.0:
        raise ValidationError("field 'landmarks': coordinates must lie in [0, 1]")
    lm = LandmarkSet(points=arr)
    sigma = body.get("sigma_px")
    if sigma is not None:
        sigma = float(sigma)
        if not np.isfinite(sigma) or sigma <= 0:
            raise ValidationError("field 'sigma_px': must be a positive real")
    return lm, sigma, bool(body.get("return_heatmap", False))


def _heatmap_png(heat) -> bytes:
    from PIL import Image
    import io
    gray = np.clip(heat.data * 255.0, 0, 255).astype(np.uint8)
    buf = io.BytesIO()
    Image.fromarray(gray, mode="L").save(buf, format="PNG")
    return buf.getvalue()


class ServiceState:
    """Mutable holder so checkpoint hot-swap stays atomic for the handlers."""

    def __init__(self, snapshot: ModelSnapshot | None = None, static_dir=None,
                 default_sigma: float = DEFAULT_SIGMA_PX):
        self.snapshot = snapshot
        self.static_dir = static_dir
        self.default_sigma = default_sigma
        self.latencies_ms: list[float] = []
        self.lock = threading.Lock()

    def record_latency(self, ms: float) -> None:
        with self.lock:
            self.latencies_ms.append(ms)
            if len(self.latencies_ms) % 20 == 0:
                p50 = float(np.median(self.latencies_ms))
                log.info("synthesize p50 latency: %.1f ms over %d requests",
                         p50, len(self.latencies_ms))


class ApiHandler(BaseHTTPRequestHandler):
    server_version = "lm2face/0.1"

    @property
    def state(self) -> ServiceState:
        return self.server.state  # type: ignore[attr-defined]

    def log_message(self, fmt, *args):
        log.debug("%s - %s", self.address_string(), fmt % args)

    def _send_json(self, code: int, payload: dict) -> None:
        raw = json.dumps(payload).encode()
        self.send_response(code)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(raw)))
        self._cors()
        self.end_headers()
        self.wfile.write(raw)

    def _cors(self) -> None:
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")

    def do_OPTIONS(self):
        self.send_response(204)
        self._cors()
        self.end_headers()

    def do_GET(self):
        path = self.path.split("?", 1)[0]
        if path == "/api/health":
            snap = self.state.snapshot
            if snap is None:
                self._send_json(503, {"status": "loading", "checkpoint": None})
            else:
                self._send_json(200, {"status": "ok", "checkpoint": snap.checkpoint_hash})
            return
        if path == "/api/templates":
            payload = [{"name": name, "points": template(name).points.tolist()}
                       for name in TEMPLATE_NAMES]
            self._send_json(200, {"templates": payload})
            return
        self._serve_static(path)

    def _serve_static(self, path: str) -> None:
        static_dir = self.state.static_dir
        if static_dir is None:
            self._send_json(404, {"error": f"no route for {path}"})
            return
        rel = path.lstrip("/") or "index.html"
        full = os.path.realpath(os.path.join(static_dir, rel))
        if not full.startswith(os.path.realpath(static_dir)) or not os.path.isfile(full):
            self._send_json(404, {"error": f"no route for {path}"})
            return
        ctype = mimetypes.guess_type(full)[0] or "application/octet-stream"
        with open(full, "rb") as fh:
            raw = fh.read()
        self.send_response(200)
        self.send_header("Content-Type", ctype)
        self.send_header("Content-Length", str(len(raw)))
        self._cors()
        self.end_headers()
        self.wfile.write(raw)

    def do_POST(self):
        path = self.path.split("?", 1)[0]
        if path != "/api/synthesize":
            self._send_json(404, {"error": f"no route for {path}"})
            return
        snap = self.state.snapshot
        if snap is None:
            self._send_json(503, {"error": "model not loaded"})
            return
        try:
            length = int(self.headers.get("Content-Length", "0"))
            body = json.loads(self.rfile.read(length) or b"{}")
            lm, sigma, want_heatmap = _parse_synthesis_request(body)
        except ValidationError as exc:
            self._send_json(400, {"error": str(exc)})
            return
        except json.JSONDecodeError as exc:
            self._send_json(400, {"error": f"malformed JSON body: {exc}"})
            return

        t0 = time.perf_counter()
        sigma = sigma if sigma is not None else self.state.default_sigma
        try:
            face = synthesize_faces(snap.generator, [lm], sigma_px=sigma)[0]
        except (ValidationError, CheckpointError) as exc:
            self._send_json(400, {"error": str(exc)})
            return
        with torch.no_grad():
            score = float(snap.classifier.score(faces_to_tensor([face])))
        latency_ms = (time.perf_counter() - t0) * 1000.0
        self.state.record_latency(latency_ms)

        payload = {
            "image": base64.b64encode(face.to_png_bytes()).decode(),
            "gender_score": score,
            "latency_ms": latency_ms,
        }
        if want_heatmap:
            heat = render_heatmap(lm, size=snap.generator.spec.input_shape[1], sigma_px=sigma)
            payload["heatmap"] = base64.b64encode(_heatmap_png(heat)).decode()
        self._send_json(200, payload)


def make_server(checkpoint_path=None, host: str = "127.0.0.1", port: int = 8765,
                static_dir=None, default_sigma: float = DEFAULT_SIGMA_PX) -> ThreadingHTTPServer:
    """Build (and optionally pre-load) the HTTP server without starting it."""
    state = ServiceState(static_dir=static_dir, default_sigma=default_sigma)
    if checkpoint_path is not None:
        state.snapshot = load_snapshot(checkpoint_path)
    server = ThreadingHTTPServer((host, port), ApiHandler)
    server.state = state  # type: ignore[attr-defined]
    server.daemon_threads = True
    return server


def serve_forever(checkpoint_path, host: str = "127.0.0.1", port: int = 8765,
                  static_dir=None, default_sigma: float = DEFAULT_SIGMA_PX) -> None:
    torch.set_num_threads(max(1, torch.get_num_threads()))
    server = make_server(checkpoint_path, host=host, port=port,
                         static_dir=static_dir, default_sigma=default_sigma)
    log.info("serving on http://%s:%d", host, port)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
