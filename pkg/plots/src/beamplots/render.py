"""Figure builders for the four supported plot kinds.

Rendering is deterministic: identical inputs produce identical figures, and
file metadata that would embed timestamps is stripped.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

from .errors import NoDataError, PlotsError, SchemaError  # noqa: E402
from .io import RecordsTable, read_comparison, read_records  # noqa: E402

KINDS = ("margin_cdf", "outage_bars", "tb_vs_speed", "snr_trace")
FORMATS = ("png", "svg", "pdf")


@dataclass(frozen=True)
class PlotSpec:
    kind: str
    csv_paths: tuple[str, ...]
    output_path: str
    title: str | None = None
    style: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise PlotsError(f"unknown plot kind {self.kind!r}; choose from {KINDS}")
        if not self.csv_paths:
            raise NoDataError("no input CSVs given")
        ext = os.path.splitext(self.output_path)[1].lstrip(".").lower()
        if ext not in FORMATS:
            raise PlotsError(f"unsupported output format {ext!r}; use {FORMATS}")


def cdf_at(values: np.ndarray, x: float) -> float:
    """Empirical CDF of `values` evaluated at x (fraction ≤ x)."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise NoDataError("empty value list")
    return float(np.count_nonzero(values <= x)) / values.size


def margin_cdf_points(margins: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Step-function support points (x sorted, cumulative fraction)."""
    x = np.sort(np.asarray(margins, dtype=float))
    if x.size == 0:
        raise NoDataError("no margin samples")
    y = np.arange(1, x.size + 1) / x.size
    return x, y


def _caption(tables: list[RecordsTable]) -> str:
    seen: list[str] = []
    for t in tables:
        c = t.caption()
        if c not in seen:
            seen.append(c)
    return "; ".join(seen)


def _fig_margin_cdf(tables: list[RecordsTable], spec: PlotSpec):
    fig, ax = plt.subplots(figsize=(6, 4))
    for t in tables:
        x, y = margin_cdf_points(t.margin_db)
        gamma = t.gamma_th_db[0]
        ax.step(np.concatenate(([x[0]], x)), np.concatenate(([0.0], y)),
                where="post", label=f"{t.label} (threshold {gamma:.1f} dB)")
    ax.axvline(0.0, color="k", linestyle="--", linewidth=0.8)
    ax.set_xlabel("SNR margin from threshold (dB)")
    ax.set_ylabel("CDF")
    ax.set_ylim(0, 1.02)
    ax.legend(fontsize=8)
    return fig, ax


def _fig_outage_bars(tables: list[RecordsTable], spec: PlotSpec):
    fig, ax = plt.subplots(figsize=(6, 4))
    labels = [t.label for t in tables]
    outages = [100.0 * np.mean(t.outage) for t in tables]
    ax.bar(range(len(tables)), outages, tick_label=labels)
    ax.set_ylabel("outage (%)")
    ax.tick_params(axis="x", labelrotation=20, labelsize=8)
    return fig, ax


def _fig_tb_vs_speed(spec: PlotSpec):
    fig, ax = plt.subplots(figsize=(6, 4))
    plotted = 0
    for path in spec.csv_paths:
        table = read_comparison(path)
        policies = sorted(set(table["policy"]))
        for pol in policies:
            mask = np.array([p == pol for p in table["policy"]])
            speeds = table["speed_deg_s"][mask]
            tbs = table["mean_tb_s"][mask]
            order = np.argsort(speeds)
            ax.plot(speeds[order], tbs[order], marker="o", label=pol)
            plotted += 1
    if plotted == 0:
        raise NoDataError("comparison files contain no policy rows")
    ax.set_xlabel("rotation speed (deg/s)")
    ax.set_ylabel("mean alignment time (s)")
    ax.set_yscale("log")
    ax.legend(fontsize=8)
    return fig, ax


def _fig_snr_trace(tables: list[RecordsTable], spec: PlotSpec):
    fig, ax = plt.subplots(figsize=(7, 4))
    for t in tables:
        ax.plot(t.t_s, t.snr_db, linewidth=1.0, label=t.label)
        for gamma in np.unique(t.gamma_th_db):
            ax.axhline(float(gamma), linestyle="--", linewidth=0.8, color="gray")
    ax.set_xlabel("time (s)")
    ax.set_ylabel("SNR (dB)")
    ax.legend(fontsize=8)
    return fig, ax


def build_figure(spec: PlotSpec):
    """Build (but do not save) the matplotlib figure for a spec."""
    if spec.kind == "tb_vs_speed":
        fig, ax = _fig_tb_vs_speed(spec)
        caption = os.path.basename(spec.csv_paths[0])
    else:
        tables = [read_records(p) for p in spec.csv_paths]
        if spec.kind == "margin_cdf":
            fig, ax = _fig_margin_cdf(tables, spec)
        elif spec.kind == "outage_bars":
            fig, ax = _fig_outage_bars(tables, spec)
        else:
            fig, ax = _fig_snr_trace(tables, spec)
        caption = _caption(tables)
    if spec.title:
        ax.set_title(spec.title)
    fig.text(0.01, 0.01, caption, fontsize=7, color="gray")
    fig.tight_layout(rect=(0, 0.03, 1, 1))
    return fig


def render(spec: PlotSpec) -> str:
    """Render the figure to spec.output_path and return the path."""
    fig = build_figure(spec)
    ext = os.path.splitext(spec.output_path)[1].lstrip(".").lower()
    # strip per-run metadata so identical inputs give identical bytes
    plt.rcParams["svg.hashsalt"] = "beamplots"
    metadata = {"Date": None} if ext == "svg" else {}
    if ext == "pdf":
        metadata = {"CreationDate": None}
    try:
        fig.savefig(spec.output_path, metadata=metadata)
    finally:
        plt.close(fig)
    return spec.output_path
