"""Decision-support HTTP API over a loaded model bundle.

Handlers are pure functions of (bundle, request): identical inputs produce
identical response bytes, so any number of concurrent requests agree. The
server shares one immutable bundle through an atomically swappable holder;
JSON over HTTP/1.1, no authentication (desk-scale tooling).
"""

from __future__ import annotations

import json
import math
import posixpath
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

from .bundle import ModelBundle, dump_json_bytes
from .conformal import predict_interval
from .data import DEFAULT_ALLOWED_SCORES, METRIC_KEYS, DesignType
from .errors import UnknownDesignError, ValidationError
from .learners import NINE_KINDS
from .preprocess import transform_features
from .stacking import ensemble_average, predict_stacked

_NINE_SET = set(NINE_KINDS)

DEFAULT_ALPHA = 0.1


def validate_request(doc: dict, allowed_scores) -> tuple:
    """-> (design, scores, alpha); raises ValidationError naming the field."""
    if not isinstance(doc, dict):
        raise ValidationError("body", "request body must be a JSON object")
    try:
        design = DesignType.from_label(doc.get("design"))
    except UnknownDesignError:
        raise ValidationError(
            "design",
            f"unknown design {doc.get('design')!r}; expected one of "
            f"{sorted(d.value for d in DesignType)}",
        ) from None
    raw_scores = doc.get("scores")
    if not isinstance(raw_scores, dict):
        raise ValidationError("scores", "scores must be an object of the ten metrics")
    extra = set(raw_scores) - set(METRIC_KEYS)
    if extra:
        raise ValidationError(sorted(extra)[0], "unknown metric")
    scores = {}
    for key in METRIC_KEYS:
        if key not in raw_scores:
            raise ValidationError(key, "missing metric score")
        value = raw_scores[key]
        if not isinstance(value, int) or isinstance(value, bool):
            raise ValidationError(key, f"score must be an integer, got {value!r}")
        if value not in allowed_scores:
            raise ValidationError(
                key, f"score {value} not in allowed set {sorted(allowed_scores)}"
            )
        scores[key] = value
    alpha = doc.get("alpha", DEFAULT_ALPHA)
    if not isinstance(alpha, (int, float)) or isinstance(alpha, bool) \
            or not 0.0 < float(alpha) < 1.0:
        raise ValidationError("alpha", f"alpha must be in (0, 1), got {alpha!r}")
    return design, scores, float(alpha)


def bundle_allowed_scores(bundle: ModelBundle):
    stored = bundle.metadata.get("allowed_scores")
    return frozenset(stored) if stored else DEFAULT_ALLOWED_SCORES


def build_prediction(bundle: ModelBundle, design: DesignType, scores: dict,
                     alpha: float) -> dict:
    """PredictionResponse content for one scored scenario."""
    X = transform_features(bundle.pipeline, design, scores)
    per_model = {}
    for kind, model in bundle.models.items():
        per_model[kind] = math.exp(float(model.predict(X)[0]))
    nine = {k: v for k, v in per_model.items() if k in _NINE_SET}
    ensemble = ensemble_average(nine)
    if bundle.stacked is not None:
        per_model["stacked"] = math.exp(float(predict_stacked(bundle.stacked, X)[0]))
    lower, upper = _interval(bundle, math.log(ensemble), alpha)
    return {
        "per_model": per_model,
        "ensemble_mean": ensemble,
        "recommended_n": max(1, math.ceil(ensemble)),
        "interval": {"lower": lower, "upper": upper, "alpha": alpha},
        "importances": bundle.importances["impurity"],
        "model_version": bundle.fingerprint,
    }


def _interval(bundle: ModelBundle, pred_log: float, alpha: float):
    lower, upper = predict_interval(bundle.conformal, pred_log, alpha)
    return lower, (None if math.isinf(upper) else upper)


def handle_predict(bundle: ModelBundle, body: bytes):
    """-> (status_code, response_dict)."""
    try:
        doc = json.loads(body)
    except json.JSONDecodeError:
        return 422, {"error": {"field": "body", "message": "request body is not valid JSON"}}
    try:
        design, scores, alpha = validate_request(doc, bundle_allowed_scores(bundle))
    except ValidationError as exc:
        return 422, {"error": {"field": exc.field, "message": exc.message}}
    return 200, build_prediction(bundle, design, scores, alpha)


def handle_models(bundle: ModelBundle):
    return 200, bundle.report.to_dict()


def handle_importance(bundle: ModelBundle):
    return 200, {"impurity": bundle.importances["impurity"],
                 "permutation": bundle.importances["permutation"]}


def handle_healthz(bundle: ModelBundle):
    return 200, {"status": "ok", "model_version": bundle.fingerprint}


class BundleHolder:
    """Atomic reference to the currently served bundle; in-flight requests
    keep the reference they grabbed."""

    def __init__(self, bundle: ModelBundle):
        self._bundle = bundle
        self._lock = threading.Lock()

    def get(self) -> ModelBundle:
        return self._bundle

    def swap(self, bundle: ModelBundle) -> None:
        with self._lock:
            self._bundle = bundle


class _Handler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    holder: BundleHolder = None
    static_dir: Path | None = None

    def log_message(self, fmt, *args):  # quiet by default
        pass

    def _send_json(self, status: int, payload: dict):
        body = dump_json_bytes(payload)
        self.send_response(status)
        self.send_header("Content-Type", "application/json; charset=utf-8")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def do_GET(self):
        bundle = self.holder.get()
        if self.path == "/healthz":
            self._send_json(*handle_healthz(bundle))
        elif self.path == "/api/v1/models":
            self._send_json(*handle_models(bundle))
        elif self.path == "/api/v1/importance":
            self._send_json(*handle_importance(bundle))
        elif self.static_dir is not None:
            self._send_static(self.path)
        else:
            self._send_json(404, {"error": {"field": "path", "message": "not found"}})

    def do_POST(self):
        if self.path != "/api/v1/predict":
            self._send_json(404, {"error": {"field": "path", "message": "not found"}})
            return
        length = int(self.headers.get("Content-Length", 0))
        body = self.rfile.read(length)
        status, payload = handle_predict(self.holder.get(), body)
        self._send_json(status, payload)

    def _send_static(self, path: str):
        clean = posixpath.normpath(path.lstrip("/")) or "index.html"
        if clean.startswith(".."):
            self._send_json(404, {"error": {"field": "path", "message": "not found"}})
            return
        target = self.static_dir / clean
        if target.is_dir():
            target = target / "index.html"
        if not target.is_file():
            self._send_json(404, {"error": {"field": "path", "message": "not found"}})
            return
        content_types = {".html": "text/html", ".js": "text/javascript",
                         ".css": "text/css", ".json": "application/json",
                         ".svg": "image/svg+xml", ".png": "image/png"}
        body = target.read_bytes()
        self.send_response(200)
        self.send_header("Content-Type",
                         content_types.get(target.suffix, "application/octet-stream"))
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)


class _Server(ThreadingHTTPServer):
    daemon_threads = False  # join request threads on close (graceful drain)
    request_queue_size = 128


def make_server(bundle: ModelBundle, host: str = "127.0.0.1", port: int = 8080,
                static_dir=None) -> ThreadingHTTPServer:
    """A ready-to-run threaded HTTP server. ``server.shutdown()`` drains
    in-flight requests before ``serve_forever`` returns."""
    holder = BundleHolder(bundle)
    handler = type("BoundHandler", (_Handler,), {
        "holder": holder,
        "static_dir": Path(static_dir) if static_dir else None,
    })
    server = _Server((host, port), handler)
    server.bundle_holder = holder
    return server
