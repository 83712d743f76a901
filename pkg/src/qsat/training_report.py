"""Report emission: JSON, delimited plot data, and rendered figures.

The report directory holds the machine-readable outputs (report.json,
report.csv, predictions.csv, design_stats.csv) and, unless disabled, PNG
figures rendered from exactly the same data.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import numpy as np

from .bundle import dump_json_bytes
from .data import DESIGN_ORDER, Dataset
from .evaluation import ComparisonReport

REPORT_COLUMNS = ("model", "test_r2", "train_r2", "test_mae_log", "test_mae_raw",
                  "test_rmse_log", "best_params", "error")


def design_sample_stats(before: Dataset, after: Dataset) -> dict:
    """Per-design sample-size mean/median/count before and after trimming."""
    stats = {}
    for d in DESIGN_ORDER:
        pre = [r.sample_size for r in before if r.design is d]
        post = [r.sample_size for r in after if r.design is d]
        stats[d.value] = {
            "mean_before": float(np.mean(pre)) if pre else None,
            "median_before": float(np.median(pre)) if pre else None,
            "count_before": len(pre),
            "mean_after": float(np.mean(post)) if post else None,
            "median_after": float(np.median(post)) if post else None,
            "count_after": len(post),
        }
    return stats


def report_csv_text(report: ComparisonReport) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(REPORT_COLUMNS)
    for row in report.rows:
        writer.writerow([
            row.get("model"),
            row.get("test_r2", ""),
            row.get("train_r2", ""),
            row.get("test_mae_log", ""),
            row.get("test_mae_raw", ""),
            row.get("test_rmse_log", ""),
            json.dumps(row.get("best_params"), sort_keys=True),
            row.get("error") or "",
        ])
    return out.getvalue()


def predictions_csv_text(results, y_test_log: np.ndarray) -> str:
    """Long-format predicted-vs-true pairs for scatter rendering."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(("model", "y_true_log", "y_pred_log", "y_true", "y_pred"))
    for res in results:
        if res.test_pred_log is None:
            continue
        for yt, yp in zip(y_test_log, res.test_pred_log):
            writer.writerow((res.kind, repr(float(yt)), repr(float(yp)),
                             repr(float(np.exp(yt))), repr(float(np.exp(yp)))))
    return out.getvalue()


def design_stats_csv_text(stats: dict) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(("design", "mean_before", "median_before", "count_before",
                     "mean_after", "median_after", "count_after"))
    for design, row in stats.items():
        writer.writerow((design, row["mean_before"], row["median_before"],
                         row["count_before"], row["mean_after"],
                         row["median_after"], row["count_after"]))
    return out.getvalue()


def write_report_files(report: ComparisonReport, results, y_test_log,
                       design_stats: dict, out_dir, figures: bool = True) -> list:
    """Write every report artifact into ``out_dir``; returns written paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []

    def _write(name: str, data):
        path = out_dir / name
        if isinstance(data, bytes):
            path.write_bytes(data)
        else:
            path.write_text(data, encoding="utf-8")
        written.append(path)

    _write("report.json", dump_json_bytes(report.to_dict(), indent=2))
    _write("report.csv", report_csv_text(report))
    _write("predictions.csv", predictions_csv_text(results, y_test_log))
    _write("design_stats.csv", design_stats_csv_text(design_stats))
    if figures:
        written.extend(render_figures(report, results, y_test_log, design_stats, out_dir))
    return written


def render_figures(report: ComparisonReport, results, y_test_log,
                   design_stats: dict, out_dir) -> list:
    """Render the comparison bars, scatter grid, and trimming-effect chart."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out_dir = Path(out_dir)
    written = []

    rows = [r for r in report.rows if r.get("error") in (None, "")
            and "test_r2" in r]
    if rows:
        names = [r["model"] for r in rows]
        x = np.arange(len(names))
        fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(12, 4.5))
        ax1.bar(x - 0.2, [r["test_r2"] for r in rows], width=0.4, label="test")
        ax1.bar(x + 0.2, [r["train_r2"] for r in rows], width=0.4, label="train")
        ax1.set_xticks(x, names, rotation=45, ha="right")
        ax1.set_ylabel("R^2")
        ax1.set_title("Explained variance by model")
        ax1.legend()
        ax2.bar(x, [r["test_mae_log"] for r in rows], width=0.5, color="#bb5544")
        ax2.set_xticks(x, names, rotation=45, ha="right")
        ax2.set_ylabel("test MAE (log target)")
        ax2.set_title("Held-out absolute error")
        fig.tight_layout()
        path = out_dir / "model_comparison.png"
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)

    scatter = [r for r in results if r.test_pred_log is not None]
    if scatter:
        cols = 3
        rows_n = (len(scatter) + cols - 1) // cols
        fig, axes = plt.subplots(rows_n, cols, figsize=(4 * cols, 3.4 * rows_n),
                                 squeeze=False)
        lo = float(np.min(y_test_log))
        hi = float(np.max(y_test_log))
        for ax, res in zip(axes.flat, scatter):
            ax.scatter(y_test_log, res.test_pred_log, s=12, alpha=0.6)
            ax.plot([lo, hi], [lo, hi], color="gray", linewidth=1)
            ax.set_title(res.kind)
            ax.set_xlabel("true log n")
            ax.set_ylabel("predicted log n")
        for ax in axes.flat[len(scatter):]:
            ax.set_visible(False)
        fig.tight_layout()
        path = out_dir / "predicted_vs_true.png"
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)

    if design_stats:
        names = list(design_stats.keys())
        x = np.arange(len(names))
        fig, ax = plt.subplots(figsize=(8, 4.5))
        before = [design_stats[n]["mean_before"] or 0.0 for n in names]
        after = [design_stats[n]["mean_after"] or 0.0 for n in names]
        ax.bar(x - 0.2, before, width=0.4, label="before trimming")
        ax.bar(x + 0.2, after, width=0.4, label="after trimming")
        ax.set_xticks(x, names, rotation=30, ha="right")
        ax.set_ylabel("mean sample size")
        ax.set_title("Trimming effect on per-design means")
        ax.legend()
        fig.tight_layout()
        path = out_dir / "design_distributions.png"
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)

    return written
