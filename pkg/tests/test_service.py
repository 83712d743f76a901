"""HTTP service: validation, handlers, live server behavior, concurrency."""

import json
import math
import threading
import urllib.error
import urllib.request
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest

from qsat import learners
from qsat.bundle import dump_json_bytes
from qsat.data import METRIC_KEYS, DesignType
from qsat.errors import ValidationError
from qsat.service import (
    build_prediction,
    handle_healthz,
    handle_importance,
    handle_models,
    handle_predict,
    make_server,
    validate_request,
)

ALL_15 = {k: 15 for k in METRIC_KEYS}
ALLOWED = frozenset({10, 15, 20, 25})


def _request_body(design="phenomenology", scores=None, alpha=0.1):
    return {"design": design, "scores": scores or dict(ALL_15), "alpha": alpha}


class TestValidation:
    def test_valid_request(self):
        design, scores, alpha = validate_request(_request_body(), ALLOWED)
        assert design is DesignType.PHENOMENOLOGY
        assert scores == ALL_15
        assert alpha == 0.1

    def test_unknown_design(self):
        with pytest.raises(ValidationError) as err:
            validate_request(_request_body(design="oral_history"), ALLOWED)
        assert err.value.field == "design"

    def test_score_out_of_set(self):
        bad = dict(ALL_15, information_power=99)
        with pytest.raises(ValidationError) as err:
            validate_request(_request_body(scores=bad), ALLOWED)
        assert err.value.field == "information_power"

    def test_missing_score(self):
        bad = dict(ALL_15)
        del bad["data_quality"]
        with pytest.raises(ValidationError) as err:
            validate_request(_request_body(scores=bad), ALLOWED)
        assert err.value.field == "data_quality"

    def test_alpha_bounds(self):
        for alpha in (0.0, 1.0, -1, 2, "x", True):
            with pytest.raises(ValidationError) as err:
                validate_request(_request_body(alpha=alpha), ALLOWED)
            assert err.value.field == "alpha"

    def test_alpha_default(self):
        body = _request_body()
        del body["alpha"]
        _, _, alpha = validate_request(body, ALLOWED)
        assert alpha == 0.1


class TestHandlers:
    def test_predict_response_fields(self, fixture_bundle):
        status, resp = handle_predict(
            fixture_bundle, json.dumps(_request_body()).encode())
        assert status == 200
        assert set(resp) == {"per_model", "ensemble_mean", "recommended_n",
                             "interval", "importances", "model_version"}
        assert set(learners.NINE_KINDS) <= set(resp["per_model"])
        assert "stacked" in resp["per_model"]
        assert resp["recommended_n"] == math.ceil(resp["ensemble_mean"])
        assert resp["recommended_n"] >= 1
        lo, hi = resp["interval"]["lower"], resp["interval"]["upper"]
        assert lo <= resp["recommended_n"]
        assert hi is None or hi >= resp["recommended_n"]
        assert resp["model_version"] == fixture_bundle.fingerprint

    def test_stub_models_constant_prediction(self, fixture_bundle):
        # every model replaced by a log(20) stub -> all outputs exactly 20
        def fit(X, y, params, seed):
            return {}

        def predict(state, X):
            return np.full(len(X), math.log(20.0))

        learners.register_kind("const20", fit, predict,
                               to_dict=lambda s: {}, from_dict=lambda d: {})
        stub = learners.fit_model("const20", np.zeros((2, 15)), np.zeros(2), None, 0)
        models = {kind: stub for kind in learners.NINE_KINDS}
        from dataclasses import replace

        bundle = replace(fixture_bundle, models=models, stacked=None,
                         _fingerprint=[])
        resp = build_prediction(bundle, DesignType.PHENOMENOLOGY, ALL_15, 0.1)
        for kind in learners.NINE_KINDS:
            assert resp["per_model"][kind] == pytest.approx(20.0, rel=1e-12)
        assert resp["ensemble_mean"] == pytest.approx(20.0, rel=1e-12)
        assert resp["recommended_n"] == 20

    def test_predict_validation_error_shape(self, fixture_bundle):
        body = json.dumps(_request_body(scores=dict(ALL_15, information_power=99)))
        status, resp = handle_predict(fixture_bundle, body.encode())
        assert status == 422
        assert resp["error"]["field"] == "information_power"

    def test_predict_bad_json(self, fixture_bundle):
        status, resp = handle_predict(fixture_bundle, b"{not json")
        assert status == 422
        assert resp["error"]["field"] == "body"

    def test_models_endpoint_rows(self, fixture_bundle):
        status, resp = handle_models(fixture_bundle)
        assert status == 200
        kinds = {row["model"] for row in resp["rows"]}
        assert set(learners.NINE_KINDS) == kinds

    def test_importance_normalized(self, fixture_bundle):
        status, resp = handle_importance(fixture_bundle)
        assert status == 200
        for method in ("impurity", "permutation"):
            total = sum(resp[method].values())
            assert total == pytest.approx(1.0, abs=1e-9)

    def test_healthz(self, fixture_bundle):
        status, resp = handle_healthz(fixture_bundle)
        assert status == 200
        assert resp["status"] == "ok"
        assert resp["model_version"] == fixture_bundle.fingerprint

    def test_identical_requests_identical_bytes(self, fixture_bundle):
        body = json.dumps(_request_body()).encode()
        a = dump_json_bytes(handle_predict(fixture_bundle, body)[1])
        b = dump_json_bytes(handle_predict(fixture_bundle, body)[1])
        assert a == b

    def test_bundle_holder_atomic_swap(self, fixture_bundle):
        from dataclasses import replace

        from qsat.service import BundleHolder

        holder = BundleHolder(fixture_bundle)
        before = holder.get()
        swapped = replace(fixture_bundle, metadata=dict(fixture_bundle.metadata,
                                                        note="v2"),
                          _fingerprint=[])
        holder.swap(swapped)
        assert holder.get() is swapped
        assert before is fixture_bundle  # the old reference stays usable

    def test_alpha_monotone_interval(self, fixture_bundle):
        tight = build_prediction(fixture_bundle, DesignType.PHENOMENOLOGY,
                                 ALL_15, 0.2)["interval"]
        wide = build_prediction(fixture_bundle, DesignType.PHENOMENOLOGY,
                                ALL_15, 0.05)["interval"]
        assert wide["lower"] <= tight["lower"]
        assert wide["upper"] is None or wide["upper"] >= tight["upper"]


@pytest.fixture()
def live_server(fixture_bundle):
    server = make_server(fixture_bundle, "127.0.0.1", 0)
    port = server.server_address[1]
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{port}"
    server.shutdown()
    server.server_close()
    thread.join(timeout=5)


def _get(url):
    with urllib.request.urlopen(url, timeout=10) as resp:
        return resp.status, resp.read()


def _post(url, payload):
    req = urllib.request.Request(
        url, data=json.dumps(payload).encode(),
        headers={"Content-Type": "application/json"}, method="POST",
    )
    try:
        with urllib.request.urlopen(req, timeout=10) as resp:
            return resp.status, resp.read()
    except urllib.error.HTTPError as err:
        return err.code, err.read()


class TestLiveServer:
    def test_healthz_liveness(self, live_server):
        status, body = _get(live_server + "/healthz")
        assert status == 200
        doc = json.loads(body)
        assert doc["status"] == "ok"

    def test_predict_roundtrip(self, live_server):
        status, body = _post(live_server + "/api/v1/predict", _request_body())
        assert status == 200
        doc = json.loads(body)
        assert doc["recommended_n"] >= 1

    def test_validation_422_over_wire(self, live_server):
        payload = _request_body(scores=dict(ALL_15, research_scope=7))
        status, body = _post(live_server + "/api/v1/predict", payload)
        assert status == 422
        assert json.loads(body)["error"]["field"] == "research_scope"

    def test_models_and_importance_endpoints(self, live_server):
        status, body = _get(live_server + "/api/v1/models")
        assert status == 200 and b"rows" in body
        status, body = _get(live_server + "/api/v1/importance")
        assert status == 200
        doc = json.loads(body)
        assert set(doc) == {"impurity", "permutation"}

    def test_unknown_path_404(self, live_server):
        try:
            status, _ = _get(live_server + "/nope")
        except urllib.error.HTTPError as err:
            status = err.code
        assert status == 404

    def test_concurrent_identical_requests_identical_bytes(self, live_server):
        payload = _request_body()

        def call(_):
            return _post(live_server + "/api/v1/predict", payload)

        with ThreadPoolExecutor(max_workers=64) as pool:
            results = list(pool.map(call, range(64)))
        statuses = {status for status, _ in results}
        bodies = {body for _, body in results}
        assert statuses == {200}
        assert len(bodies) == 1

    def test_graceful_shutdown_drains_in_flight_request(self, fixture_bundle):
        import socket
        import time

        server = make_server(fixture_bundle, "127.0.0.1", 0)
        port = server.server_address[1]
        thread = threading.Thread(target=server.serve_forever)
        thread.start()

        # open a request and stall before sending the body: the handler is
        # now mid-request when shutdown arrives
        payload = json.dumps(_request_body()).encode()
        sock = socket.create_connection(("127.0.0.1", port), timeout=10)
        sock.sendall(
            b"POST /api/v1/predict HTTP/1.1\r\nHost: t\r\n"
            b"Content-Type: application/json\r\nConnection: close\r\n"
            b"Content-Length: " + str(len(payload)).encode() + b"\r\n\r\n"
        )
        time.sleep(0.3)  # let the handler block on the body read
        stopper = threading.Thread(target=server.shutdown)
        stopper.start()
        stopper.join(timeout=10)  # serve loop exits with the request open
        sock.sendall(payload)  # release the in-flight request
        sock.settimeout(10)
        chunks = []
        while True:
            data = sock.recv(65536)
            if not data:
                break
            chunks.append(data)
        sock.close()
        server.server_close()  # joins the handler thread (drain)
        thread.join(timeout=5)
        assert not thread.is_alive()
        response = b"".join(chunks)
        assert response.startswith(b"HTTP/1.1 200")
        assert b"recommended_n" in response
