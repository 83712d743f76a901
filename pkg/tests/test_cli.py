"""CLI subcommands: synth, train, evaluate, predict, serve."""

import json
import socket
import subprocess
import sys
import threading
import urllib.request

import numpy as np
import pytest

from qsat.bundle import dump_json_bytes, load_bundle
from qsat.cli import main
from qsat.data import CSV_HEADER, METRIC_KEYS, parse_csv
from qsat.service import handle_predict

from .conftest import FAST_GRIDS

ALL_15_FLAGS = [f"--score={k}=15" for k in METRIC_KEYS]


def _write_grids(tmp_path):
    path = tmp_path / "grids.json"
    path.write_text(json.dumps(FAST_GRIDS))
    return path


@pytest.fixture(scope="module")
def trained(tmp_path_factory, small_corpus_csv):
    """One small CLI training run shared by the module's tests."""
    root = tmp_path_factory.mktemp("cli_train")
    data = root / "corpus.csv"
    data.write_bytes(small_corpus_csv)
    grids = _write_grids(root)
    bundle_path = root / "model.qsat.json"
    report_dir = root / "report"
    code = main([
        "train", "--data", str(data), "--out", str(bundle_path),
        "--seed", "11", "--grids", str(grids), "--report-dir", str(report_dir),
    ])
    assert code == 0
    return {"root": root, "data": data, "grids": grids,
            "bundle": bundle_path, "report_dir": report_dir}


class TestSynth:
    def test_writes_expected_rows_and_sidecar(self, tmp_path):
        out = tmp_path / "corpus.csv"
        code = main(["synth", "--per-design", "20", "--seed", "42",
                     "--out", str(out)])
        assert code == 0
        ds = parse_csv(out.read_text())
        assert len(ds) == 100
        sidecar = json.loads((tmp_path / "corpus.csv.config.json").read_text())
        assert sidecar["seed"] == 42
        assert sidecar["per_design_count"] == 20

    def test_deterministic_bytes(self, tmp_path):
        a = tmp_path / "a.csv"
        b = tmp_path / "b.csv"
        for path in (a, b):
            assert main(["synth", "--per-design", "15", "--seed", "7",
                         "--out", str(path)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_invalid_flip_exits_2(self, tmp_path):
        code = main(["synth", "--per-design", "5", "--flip", "0.6",
                     "--out", str(tmp_path / "x.csv")])
        assert code == 2


class TestTrain:
    def test_report_files_written(self, trained):
        report_dir = trained["report_dir"]
        for name in ("report.json", "report.csv", "predictions.csv",
                     "design_stats.csv", "model_comparison.png",
                     "predicted_vs_true.png", "design_distributions.png"):
            assert (report_dir / name).exists(), name
        doc = json.loads((report_dir / "report.json").read_text())
        assert len(doc["rows"]) == 9
        assert all(r["error"] is None for r in doc["rows"])

    def test_bundle_loads_and_has_metadata(self, trained):
        bundle = load_bundle(trained["bundle"])
        assert bundle.metadata["seed"] == 11
        assert (trained["root"] / "model.qsat.json.config.json").exists()

    def test_rerun_identical_except_timestamp(self, trained, tmp_path):
        out2 = tmp_path / "again.qsat.json"
        code = main([
            "train", "--data", str(trained["data"]), "--out", str(out2),
            "--seed", "11", "--grids", str(trained["grids"]),
            "--report-dir", str(tmp_path / "report"), "--no-figures",
        ])
        assert code == 0
        a = json.loads(trained["bundle"].read_text())
        b = json.loads(out2.read_text())
        assert a["report"]["timestamp"] != "" and b["report"]["timestamp"] != ""
        a["report"]["timestamp"] = b["report"]["timestamp"] = ""
        assert a == b


class TestEvaluate:
    def test_leakage_warning_on_training_csv(self, trained, tmp_path, capsys):
        out_dir = tmp_path / "eval"
        code = main(["evaluate", "--bundle", str(trained["bundle"]),
                     "--data", str(trained["data"]),
                     "--report-dir", str(out_dir)])
        assert code == 0
        err = capsys.readouterr().err
        assert "fingerprint match" in err
        doc = json.loads((out_dir / "evaluation.json").read_text())
        assert doc["leakage_warning"] is True
        assert len(doc["rows"]) == 9

    def test_fresh_data_no_warning(self, trained, tmp_path):
        fresh = tmp_path / "fresh.csv"
        assert main(["synth", "--per-design", "10", "--seed", "99",
                     "--out", str(fresh)]) == 0
        out_dir = tmp_path / "eval2"
        assert main(["evaluate", "--bundle", str(trained["bundle"]),
                     "--data", str(fresh), "--report-dir", str(out_dir)]) == 0
        doc = json.loads((out_dir / "evaluation.json").read_text())
        assert doc["leakage_warning"] is False


class TestPredict:
    def test_parity_with_service_bytes(self, trained, capsysbinary):
        code = main(["predict", "--bundle", str(trained["bundle"]),
                     "--design", "phenomenology", *ALL_15_FLAGS])
        assert code == 0
        stdout = capsysbinary.readouterr().out
        bundle = load_bundle(trained["bundle"])
        body = json.dumps({"design": "phenomenology",
                           "scores": {k: 15 for k in METRIC_KEYS},
                           "alpha": 0.1}).encode()
        status, payload = handle_predict(bundle, body)
        assert status == 200
        assert stdout == dump_json_bytes(payload)

    def test_missing_score_exits_2(self, trained, capsys):
        flags = ALL_15_FLAGS[:-1]  # drop data_quality
        code = main(["predict", "--bundle", str(trained["bundle"]),
                     "--design", "phenomenology", *flags])
        assert code == 2
        assert "data_quality" in capsys.readouterr().err

    def test_invalid_score_exits_2_naming_field(self, trained, capsys):
        flags = [f for f in ALL_15_FLAGS if "information_power" not in f]
        flags.append("--score=information_power=99")
        code = main(["predict", "--bundle", str(trained["bundle"]),
                     "--design", "phenomenology", *flags])
        assert code == 2
        assert "information_power" in capsys.readouterr().err

    def test_alpha_widens_interval(self, trained, capsysbinary):
        def run(alpha):
            code = main(["predict", "--bundle", str(trained["bundle"]),
                         "--design", "case_study", "--alpha", str(alpha),
                         *ALL_15_FLAGS])
            assert code == 0
            return json.loads(capsysbinary.readouterr().out)["interval"]

        tight = run(0.2)
        wide = run(0.05)
        assert wide["lower"] <= tight["lower"]
        assert wide["upper"] is None or wide["upper"] >= tight["upper"]

    def test_scores_json_file(self, trained, tmp_path, capsysbinary):
        scores_file = tmp_path / "scores.json"
        scores_file.write_text(json.dumps({k: 15 for k in METRIC_KEYS}))
        code = main(["predict", "--bundle", str(trained["bundle"]),
                     "--design", "phenomenology",
                     "--scores-json", str(scores_file)])
        assert code == 0
        doc = json.loads(capsysbinary.readouterr().out)
        assert doc["recommended_n"] >= 1


class TestServe:
    def test_serve_and_healthz(self, trained):
        bundle = load_bundle(trained["bundle"])
        from qsat.service import make_server

        server = make_server(bundle, "127.0.0.1", 0)
        port = server.server_address[1]
        thread = threading.Thread(target=server.serve_forever, daemon=True)
        thread.start()
        with urllib.request.urlopen(f"http://127.0.0.1:{port}/healthz",
                                    timeout=10) as resp:
            doc = json.loads(resp.read())
        assert doc["status"] == "ok"
        server.shutdown()
        server.server_close()

    def test_port_in_use_exits_2(self, trained):
        blocker = socket.socket()
        blocker.bind(("127.0.0.1", 0))
        blocker.listen(1)
        port = blocker.getsockname()[1]
        code = main(["serve", "--bundle", str(trained["bundle"]),
                     "--port", str(port)])
        assert code == 2
        blocker.close()


class TestEntryPoint:
    def test_module_invocation(self, tmp_path):
        out = tmp_path / "c.csv"
        proc = subprocess.run(
            [sys.executable, "-m", "qsat.cli", "synth", "--per-design", "3",
             "--out", str(out)],
            capture_output=True, text=True, timeout=120,
        )
        assert proc.returncode == 0, proc.stderr
        assert out.exists()

    def test_usage_error_exit_code(self):
        proc = subprocess.run(
            [sys.executable, "-m", "qsat.cli", "train"],
            capture_output=True, text=True, timeout=60,
        )
        assert proc.returncode == 2
