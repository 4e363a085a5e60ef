"""Result tables (CSV) and convergence figures (SVG plus the raw series)."""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from ..core import PlotError
from .stats import ConvergenceTrace, RunStatistics

__all__ = ["ALGORITHM_LABELS", "TABLE_COLUMNS", "emit_convergence_plot", "emit_table", "format_sci"]

TABLE_COLUMNS = ["Function", "Name", "Algorithm", "Dimension", "Best", "Worst", "Mean", "Median", "SD"]
ALGORITHM_LABELS = {"original": "FPA", "proposed": "Proposed FPA"}


def format_sci(value: float) -> str:
    """Three significant digits in ``1.54E-01`` style."""
    return f"{value:.2E}"


def table_row(number: int, name: str, algorithm: str, dimension: int, stats: RunStatistics) -> list:
    return [
        number,
        name,
        ALGORITHM_LABELS.get(algorithm, algorithm),
        dimension,
        *(format_sci(v) for v in (stats.best, stats.worst, stats.mean, stats.median, stats.sd)),
    ]


def write_rows(path, rows) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(TABLE_COLUMNS)
            writer.writerows(rows)
    except OSError as exc:
        raise OSError(f"cannot write table {path}: {exc.strerror or exc}") from exc
    return path


def emit_table(records, path) -> Path:
    """Write one row per algorithm for each comparison record.

    ``records`` holds :class:`~pollination.harness.experiment.ComparisonRecord`
    objects; rows come out in the order given, side ``a`` before side ``b``.
    """
    records = list(records)
    if not records:
        raise ValueError("emit_table needs at least one comparison record")
    rows = []
    for rec in records:
        for side in (rec.a, rec.b):
            fn = side.benchmark
            rows.append(
                table_row(fn.number, fn.display_name, side.config.algorithm, fn.dimension, side.statistics)
            )
    return write_rows(path, rows)


def _plot_backend():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    # fixed salt keeps SVG element ids stable across invocations
    matplotlib.rcParams["svg.hashsalt"] = "pollination"
    return plt


def emit_convergence_plot(
    traces: Sequence[ConvergenceTrace],
    labels: Sequence[str],
    path,
    panels: Optional[Sequence] = None,
    title: Optional[str] = None,
    raw_path=None,
) -> tuple:
    """Plot mean best-so-far curves with min/max bands, one panel per key.

    ``panels[i]`` names the panel of ``traces[i]`` (typically the dimension);
    without it everything lands in a single panel. The raw series are written
    next to the SVG as ``<stem>.csv`` unless ``raw_path`` says otherwise. Returns ``(svg_path, csv_path)``.
    """
    traces, labels = list(traces), list(labels)
    if not traces:
        raise PlotError("no traces to plot")
    if len(labels) != len(traces):
        raise PlotError(f"{len(traces)} traces but {len(labels)} labels")
    panels = [None] * len(traces) if panels is None else list(panels)
    if len(panels) != len(traces):
        raise PlotError(f"{len(traces)} traces but {len(panels)} panel keys")

    order = list(dict.fromkeys(panels))
    grouped = {key: [i for i, p in enumerate(panels) if p == key] for key in order}
    for key, idx in grouped.items():
        lengths = {traces[i].generations for i in idx}
        if len(lengths) != 1:
            raise PlotError(f"panel {key}: trace lengths differ {sorted(lengths)}")

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    raw_path = path.with_suffix(".csv") if raw_path is None else Path(raw_path)
    with open(raw_path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["panel", "label", "generation", "mean", "min", "max"])
        for i, tr in enumerate(traces):
            key = "" if panels[i] is None else panels[i]
            for g in range(tr.generations):
                writer.writerow([key, labels[i], g + 1, repr(tr.mean[g]), repr(tr.lower[g]), repr(tr.upper[g])])

    plt = _plot_backend()
    fig, axes = plt.subplots(1, len(order), figsize=(5 * len(order), 4), squeeze=False)
    for ax, key in zip(axes[0], order):
        idx = grouped[key]
        gens = np.arange(1, traces[idx[0]].generations + 1)
        for i in idx:
            tr = traces[i]
            (line,) = ax.plot(gens, tr.mean, label=labels[i], linewidth=1.2)
            ax.fill_between(gens, tr.lower, tr.upper, color=line.get_color(), alpha=0.15, linewidth=0)
        if all(traces[i].all_positive() for i in idx):
            ax.set_yscale("log")
        ax.set_xlabel("Generation")
        ax.set_ylabel("Best-so-far objective")
        if key is not None:
            ax.set_title(f"Dimension {key}" if isinstance(key, (int, np.integer)) else str(key))
        ax.legend()
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path, raw_path
