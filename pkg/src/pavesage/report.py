"""Report files: comparison table, per-indicator history, manifest, figures.

Emission is a pure function of the report object: float cells are written
with repr (shortest round-trip) and the manifest has sorted keys, so
re-emitting the same report produces byte-identical files. Figures use the
object-oriented matplotlib API with the Agg canvas; no pyplot global state.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np
from matplotlib.figure import Figure

from .experiment import EvalReport

FIG_DPI = 120
_MODEL_LABELS = {"lr": "LR", "cart": "CART", "nn": "NN", "sage": "GraphSAGE"}


def _fmt(v: float | None) -> str:
    return "" if v is None else repr(float(v))


def _write_comparison(report: EvalReport, path: Path) -> None:
    header = ["indicator"]
    for m in report.models:
        header += [f"{m}_r2", f"{m}_mse", f"{m}_mae"]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for ind in report.indicators:
            row = [ind]
            for m in report.models:
                cell = report.cells.get((ind, m))
                if cell is None:
                    row += ["", "", ""]
                else:
                    row += [_fmt(cell.r2), _fmt(cell.mse), _fmt(cell.mae)]
            writer.writerow(row)


def _write_history(report: EvalReport, out_dir: Path) -> list[Path]:
    paths = []
    for ind in report.indicators:
        history = report.history.get(ind)
        if history is None:
            continue
        path = out_dir / f"history_{ind}.csv"
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["epoch", "train_r2", "test_r2"])
            for entry in history:
                writer.writerow(
                    [entry.epoch, _fmt(entry.train_r2), _fmt(entry.test_r2)]
                )
        paths.append(path)
    return paths


def _write_manifest(report: EvalReport, path: Path) -> None:
    from . import __version__

    manifest = dict(report.run_info)
    manifest.update(
        {
            "package_version": __version__,
            "indicators": list(report.indicators),
            "models": list(report.models),
            "errors": {f"{i}/{m}": msg for (i, m), msg in sorted(report.errors.items())},
        }
    )
    path.write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def _history_figure(indicator: str, history) -> Figure:
    fig = Figure(figsize=(6.4, 4.0), dpi=FIG_DPI)
    ax = fig.add_subplot(111)
    epochs = [e.epoch for e in history]
    ax.plot(epochs, [e.train_r2 for e in history], label="training", color="tab:blue")
    ax.plot(epochs, [e.test_r2 for e in history], label="testing", color="tab:orange")
    ax.set_xlabel("Epoch")
    ax.set_ylabel("$R^2$ score")
    ax.set_title(indicator)
    ax.grid(alpha=0.3)
    ax.legend()
    fig.tight_layout()
    return fig


def _comparison_figure(report: EvalReport) -> Figure:
    fig = Figure(figsize=(max(6.4, 1.2 * len(report.indicators) + 2), 4.2), dpi=FIG_DPI)
    ax = fig.add_subplot(111)
    x = np.arange(len(report.indicators))
    width = 0.8 / max(1, len(report.models))
    for j, m in enumerate(report.models):
        vals = [
            report.cells[(ind, m)].r2 if (ind, m) in report.cells else np.nan
            for ind in report.indicators
        ]
        ax.bar(x + (j - (len(report.models) - 1) / 2) * width, vals, width,
               label=_MODEL_LABELS.get(m, m))
    ax.set_xticks(x)
    ax.set_xticklabels(report.indicators, rotation=30, ha="right", fontsize=8)
    ax.set_ylabel("test $R^2$ score")
    ax.grid(axis="y", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    return fig


def emit_report(report: EvalReport, out_dir, figures: bool = True) -> list[Path]:
    """Writes all report files into out_dir and returns their paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    comparison = out / "comparison.csv"
    _write_comparison(report, comparison)
    written.append(comparison)
    written.extend(_write_history(report, out))
    manifest = out / "manifest.json"
    _write_manifest(report, manifest)
    written.append(manifest)

    if figures:
        fig_dir = out / "figures"
        fig_dir.mkdir(exist_ok=True)
        for ind in report.indicators:
            history = report.history.get(ind)
            if not history:
                continue
            path = fig_dir / f"history_{ind}.png"
            _history_figure(ind, history).savefig(path)
            written.append(path)
        if report.cells:
            path = fig_dir / "comparison_r2.png"
            _comparison_figure(report).savefig(path)
            written.append(path)
    return written
