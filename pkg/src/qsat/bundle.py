"""The persisted training artifact: pipeline + models + stacking + conformal.

A bundle is one JSON document (``*.qsat.json``, format_version 1) whose
floats are the shortest round-trip decimals of their 64-bit values, so
save -> load -> save is byte-identical and reloaded models predict exactly
like the in-memory originals.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

from . import learners
from .conformal import ConformalCalibration
from .errors import BundleSchemaError, MissingModelError, VersionMismatchError
from .evaluation import ComparisonReport
from .preprocess import PreprocessPipeline
from .stacking import StackedModel

FORMAT_VERSION = 1
BUNDLE_SUFFIX = ".qsat.json"


def dump_json_bytes(obj, indent=None) -> bytes:
    """Canonical JSON bytes: sorted keys, no NaN/Infinity, trailing newline."""
    return (json.dumps(obj, indent=indent, sort_keys=True, allow_nan=False,
                       separators=(",", ": ") if indent else (",", ":"))
            + "\n").encode("utf-8")


@dataclass(frozen=True)
class ModelBundle:
    pipeline: PreprocessPipeline
    models: dict  # kind -> RegressorModel; the nine kinds plus optional lasso
    conformal: ConformalCalibration
    conformal_protocol: str
    report: ComparisonReport
    importances: dict  # {"impurity": {...}, "permutation": {...}}
    metadata: dict
    stacked: StackedModel | None = None
    _fingerprint: list = field(default_factory=list, repr=False, compare=False)

    def to_dict(self) -> dict:
        models = {kind: learners.model_to_dict(m) for kind, m in self.models.items()}
        return {
            "format_version": FORMAT_VERSION,
            "pipeline": self.pipeline.to_dict(),
            "models": models,
            "stacked": self.stacked.to_dict() if self.stacked else None,
            "conformal": {
                "scores": self.conformal.scores.tolist(),
                "protocol": self.conformal_protocol,
            },
            "report": self.report.to_dict(),
            "importances": self.importances,
            "metadata": self.metadata,
        }

    @property
    def fingerprint(self) -> str:
        """Content hash of everything except the report timestamp."""
        if not self._fingerprint:
            doc = self.to_dict()
            doc["report"] = dict(doc["report"], timestamp="")
            digest = hashlib.sha256(dump_json_bytes(doc)).hexdigest()
            self._fingerprint.append(digest[:16])
        return self._fingerprint[0]


def _require(doc: dict, key: str, path: str):
    if not isinstance(doc, dict) or key not in doc:
        raise BundleSchemaError(f"{path}/{key}", "missing required field")
    return doc[key]


def bundle_from_dict(doc: dict) -> ModelBundle:
    if not isinstance(doc, dict):
        raise BundleSchemaError("/", "bundle document must be a JSON object")
    version = _require(doc, "format_version", "")
    if version != FORMAT_VERSION:
        raise VersionMismatchError(version, FORMAT_VERSION)
    pipeline_doc = _require(doc, "pipeline", "")
    models_doc = _require(doc, "models", "")
    if not isinstance(models_doc, dict):
        raise BundleSchemaError("/models", "must be an object")
    for kind in learners.NINE_KINDS:
        if kind not in models_doc:
            raise MissingModelError(kind)
    models = {}
    for kind, mdoc in models_doc.items():
        try:
            models[kind] = learners.model_from_dict(mdoc)
        except (KeyError, TypeError, ValueError) as exc:
            raise BundleSchemaError(f"/models/{kind}", f"malformed model: {exc}") from None
    try:
        pipeline = PreprocessPipeline.from_dict(pipeline_doc)
    except (KeyError, TypeError, ValueError) as exc:
        raise BundleSchemaError("/pipeline", f"malformed pipeline: {exc}") from None
    conformal_doc = _require(doc, "conformal", "")
    scores = _require(conformal_doc, "scores", "/conformal")
    protocol = _require(conformal_doc, "protocol", "/conformal")
    try:
        calibration = ConformalCalibration.from_dict({"scores": scores})
    except Exception as exc:
        raise BundleSchemaError("/conformal/scores", str(exc)) from None
    report_doc = _require(doc, "report", "")
    try:
        report = ComparisonReport.from_dict(report_doc)
    except (KeyError, TypeError, ValueError) as exc:
        raise BundleSchemaError("/report", f"malformed report: {exc}") from None
    importances = _require(doc, "importances", "")
    for method in ("impurity", "permutation"):
        if method not in importances:
            raise BundleSchemaError(f"/importances/{method}", "missing required field")
    metadata = _require(doc, "metadata", "")
    stacked_doc = doc.get("stacked")
    stacked = None
    if stacked_doc is not None:
        try:
            stacked = StackedModel.from_dict(stacked_doc)
        except (KeyError, TypeError, ValueError) as exc:
            raise BundleSchemaError("/stacked", f"malformed stacked model: {exc}") from None
    return ModelBundle(pipeline, models, calibration, protocol, report,
                       importances, metadata, stacked)


def save_bundle(bundle: ModelBundle, path) -> None:
    with open(path, "wb") as fh:
        fh.write(dump_json_bytes(bundle.to_dict(), indent=2))


def load_bundle(path) -> ModelBundle:
    with open(path, "rb") as fh:
        raw = fh.read()
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise BundleSchemaError("/", f"invalid or truncated JSON: {exc}") from None
    return bundle_from_dict(doc)
