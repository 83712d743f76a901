"""Operator command line: synth | train | evaluate | predict | serve.

Exit codes are a stable scripting contract: 0 success, 1 training or
evaluation failure, 2 usage/validation errors. Every file-producing run
echoes its resolved configuration to ``<output>.config.json``.
"""

from __future__ import annotations

import argparse
import json
import signal
import sys
import threading
from pathlib import Path

import numpy as np

from .bundle import dump_json_bytes, load_bundle, save_bundle
from .data import (
    DEFAULT_ALLOWED_SCORES,
    METRIC_KEYS,
    GeneratorConfig,
    parse_csv,
    serialize_csv,
    synthesize_dataset,
)
from .errors import QsatError, ValidationError
from .evaluation import build_comparison_report, compute_metrics
from .preprocess import TrimConfig, TrimMethod, transform
from .service import (
    build_prediction,
    bundle_allowed_scores,
    make_server,
    validate_request,
)
from .training import TrainConfig, corpus_fingerprint, train_bundle
from .training_report import write_report_files

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


def _write_config_echo(output_path: Path, config: dict) -> None:
    echo = Path(str(output_path) + ".config.json")
    echo.write_bytes(dump_json_bytes(config, indent=2))


def cmd_synth(args) -> int:
    cfg = GeneratorConfig(
        per_design_count=args.per_design,
        signal_strength=args.beta,
        flip_probability=args.flip,
        seed=args.seed,
    )
    dataset = synthesize_dataset(cfg)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(serialize_csv(dataset), encoding="utf-8")
    _write_config_echo(out, cfg.to_dict())
    print(f"wrote {len(dataset)} records to {out}")
    return EXIT_OK


def _trim_config(args) -> TrimConfig:
    return TrimConfig(
        method=TrimMethod(args.trim_method),
        group_by_design=not args.trim_global,
        std_multiplier=args.std_multiplier,
    )


def cmd_train(args) -> int:
    csv_bytes = Path(args.data).read_bytes()
    grids = dict()
    if args.grids:
        grids = json.loads(Path(args.grids).read_text(encoding="utf-8"))
    cfg = TrainConfig(
        seed=args.seed,
        test_fraction=args.test_fraction,
        k=args.k,
        grids=grids,
        trim=_trim_config(args),
        include_lasso=args.include_lasso,
        calibration_fraction=args.calibration_fraction,
    )
    outcome = train_bundle(csv_bytes, cfg)
    report_dir = Path(args.report_dir) if args.report_dir else Path(args.out).parent / "report"
    report = build_comparison_report(
        outcome.results, corpus_fingerprint(csv_bytes), cfg.seed, cfg.k
    ) if outcome.bundle is None else outcome.bundle.report
    write_report_files(report, outcome.results, outcome.y_test_log,
                       outcome.design_stats, report_dir, figures=not args.no_figures)

    failed = [r.kind for r in outcome.results if r.error is not None]
    for r in outcome.results:
        if r.error is not None:
            print(f"learner {r.kind} failed: {r.error}", file=sys.stderr)
    if outcome.bundle is None:
        print("bundle not written: at least one learner failed", file=sys.stderr)
        return EXIT_FAILURE if len(failed) == len(outcome.results) else EXIT_OK

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_bundle(outcome.bundle, out)
    _write_config_echo(out, cfg.to_dict())
    print(f"wrote bundle {out} (version {outcome.bundle.fingerprint}), "
          f"report in {report_dir}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    bundle = load_bundle(args.bundle)
    csv_bytes = Path(args.data).read_bytes()
    dataset = parse_csv(csv_bytes, frozenset(bundle.metadata.get(
        "allowed_scores", sorted(DEFAULT_ALLOWED_SCORES))))
    fingerprint = corpus_fingerprint(csv_bytes)
    if fingerprint == bundle.metadata.get("dataset_fingerprint"):
        print("warning: evaluation data matches the training corpus "
              "(fingerprint match); metrics describe training rows",
              file=sys.stderr)
    X, y = transform(bundle.pipeline, dataset.records)
    rows = []
    for kind in sorted(bundle.models):
        model = bundle.models[kind]
        pred = model.predict(X)
        m = compute_metrics(y, pred)
        raw_mae = float(np.mean(np.abs(np.exp(pred) - np.exp(y))))
        rows.append({
            "model": kind,
            "test_r2": m.r2,
            "test_mae_log": m.mae,
            "test_mae_raw": raw_mae,
            "test_rmse_log": m.rmse,
        })
    out_dir = Path(args.report_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    payload = {
        "rows": rows,
        "dataset_fingerprint": fingerprint,
        "bundle_version": bundle.fingerprint,
        "leakage_warning": fingerprint == bundle.metadata.get("dataset_fingerprint"),
    }
    out = out_dir / "evaluation.json"
    out.write_bytes(dump_json_bytes(payload, indent=2))
    _write_config_echo(out, {"bundle": str(args.bundle), "data": str(args.data)})
    print(f"wrote {out}")
    return EXIT_OK


def _scores_from_args(args) -> dict:
    if args.scores_json:
        doc = json.loads(Path(args.scores_json).read_text(encoding="utf-8"))
        if not isinstance(doc, dict):
            raise ValidationError("scores", "scores file must hold a JSON object")
        return doc
    scores = {}
    for item in args.score or []:
        key, _, value = item.partition("=")
        if not _:
            raise ValidationError(key or "score", "expected --score key=value")
        try:
            scores[key] = int(value)
        except ValueError:
            raise ValidationError(key, f"score must be an integer, got {value!r}") from None
    missing = [k for k in METRIC_KEYS if k not in scores]
    if missing:
        raise ValidationError(missing[0], f"missing score flags for {missing}")
    return scores


def cmd_predict(args) -> int:
    bundle = load_bundle(args.bundle)
    scores = _scores_from_args(args)
    request = {"design": args.design, "scores": scores, "alpha": args.alpha}
    design, valid_scores, alpha = validate_request(request, bundle_allowed_scores(bundle))
    response = build_prediction(bundle, design, valid_scores, alpha)
    sys.stdout.buffer.write(dump_json_bytes(response))
    return EXIT_OK


def cmd_serve(args) -> int:
    bundle = load_bundle(args.bundle)
    try:
        server = make_server(bundle, args.host, args.port, args.static_dir)
    except OSError as exc:
        print(f"cannot bind {args.host}:{args.port}: {exc}", file=sys.stderr)
        return EXIT_USAGE

    def _stop(signum, frame):
        threading.Thread(target=server.shutdown, daemon=True).start()

    signal.signal(signal.SIGTERM, _stop)
    signal.signal(signal.SIGINT, _stop)
    print(f"serving bundle {bundle.fingerprint} on http://{args.host}:{args.port}",
          file=sys.stderr)
    server.serve_forever()
    server.server_close()  # joins in-flight request threads
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qsat",
        description="Train, evaluate, and serve the qualitative sample-size recommender.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a calibrated synthetic corpus CSV")
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--per-design", type=int, default=150)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--beta", type=float, default=0.8,
                   help="monotone signal strength in [0, 1]")
    p.add_argument("--flip", type=float, default=0.1,
                   help="score flip probability in [0, 0.5)")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", help="train all learners and persist a bundle")
    p.add_argument("--data", required=True, help="training corpus CSV")
    p.add_argument("--out", required=True, help="bundle output path (*.qsat.json)")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--test-fraction", type=float, default=0.2)
    p.add_argument("--k", type=int, default=5, help="cross-validation folds")
    p.add_argument("--grids", help="JSON file overriding the default grids")
    p.add_argument("--report-dir", help="report output directory (default: <out dir>/report)")
    p.add_argument("--include-lasso", action="store_true",
                   help="also train the optional lasso learner")
    p.add_argument("--calibration-fraction", type=float, default=None,
                   help="carve a dedicated conformal calibration split from training data")
    p.add_argument("--trim-method", choices=[m.value for m in TrimMethod],
                   default=TrimMethod.PERCENTILE_95.value)
    p.add_argument("--trim-global", action="store_true",
                   help="trim over the pooled corpus instead of per design")
    p.add_argument("--std-multiplier", type=float, default=3.0)
    p.add_argument("--no-figures", action="store_true", help="skip PNG rendering")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="score an existing bundle on a held-out CSV")
    p.add_argument("--bundle", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--report-dir", required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("predict", help="one-shot prediction printed as JSON")
    p.add_argument("--bundle", required=True)
    p.add_argument("--design", required=True)
    p.add_argument("--score", action="append", metavar="KEY=VALUE",
                   help="one of the ten metric scores (repeatable)")
    p.add_argument("--scores-json", help="JSON file with all ten scores")
    p.add_argument("--alpha", type=float, default=0.1)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("serve", help="serve the prediction API over HTTP")
    p.add_argument("--bundle", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8080)
    p.add_argument("--static-dir", help="optional directory of UI assets to serve")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"invalid request: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except QsatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except json.JSONDecodeError as exc:
        print(f"error: invalid JSON input: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
