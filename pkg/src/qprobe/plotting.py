"""Figure rendering for the report path.

Every CLI command that writes a delimited table can also render the
matching figure next to it (PNG, non-interactive backend).  The CSV/JSON
files remain the interchange format; figures are a convenience view.
"""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .analytic import FeasibilityReport
from .dynamics import ObservableSeries
from .protocol import SweepTable


def trajectory_figure(series: ObservableSeries, path: Path, period: float,
                      markers: dict[str, tuple[float, float]] | None = None) -> Path:
    """Coherence/observable panels against time (in oscillator periods).

    markers maps a label to an (time, value) pair drawn on the coherence
    panel, used for the closed-form predictions at the half and full
    period.
    """
    t = series.times / period
    fig, axes = plt.subplots(3, 1, figsize=(7, 8), sharex=True)

    ax = axes[0]
    ax.plot(t, series.coherence, lw=1.5, label="qubit coherence")
    if markers:
        for label, (tm, val) in markers.items():
            ax.plot([tm / period], [val], "o", ms=7, mfc="none", label=label)
    ax.set_ylabel("coherence")
    ax.legend(loc="best", fontsize=8)
    ax.grid(alpha=0.3)

    ax = axes[1]
    ax.plot(t, series.x_mean, lw=1.0, label="<x>")
    ax.plot(t, series.p_mean, lw=1.0, label="<p>")
    ax.set_ylabel("quadratures")
    ax.legend(loc="best", fontsize=8)
    ax.grid(alpha=0.3)

    ax = axes[2]
    ax.plot(t, series.purity, lw=1.0, label="purity")
    ax.plot(t, series.top_fock_pop, lw=1.0, label="top level population")
    ax.set_yscale("log")
    ax.set_ylim(bottom=max(series.top_fock_pop.min() * 0.5, 1e-18))
    ax.set_xlabel("time (periods)")
    ax.set_ylabel("purity / leakage")
    ax.legend(loc="best", fontsize=8)
    ax.grid(alpha=0.3)

    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return Path(path)


def phase_space_figure(series: ObservableSeries, path: Path,
                       delta_x: float, delta_p: float) -> Path:
    """Mean phase-space orbit in coherent-label units."""
    fig, ax = plt.subplots(figsize=(5.5, 5.5))
    re = series.x_mean / (2.0 * delta_x)
    im = series.p_mean / (2.0 * delta_p)
    ax.plot(re, im, lw=1.0)
    ax.plot([re[0]], [im[0]], "go", label="start")
    ax.plot([re[-1]], [im[-1]], "rs", label="end")
    ax.set_xlabel("Re alpha")
    ax.set_ylabel("Im alpha")
    ax.set_aspect("equal", adjustable="datalim")
    ax.legend(loc="best", fontsize=8)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return Path(path)


def sweep_figure(table: SweepTable, path: Path) -> Path:
    """Closed-form and simulated exponents against the swept axis."""
    ok = [r for r in table.rows if r.error is None]
    fig, ax = plt.subplots(figsize=(6.5, 4.5))
    xs = np.array([r.axis_value for r in ok])
    ax.plot(xs, [r.d01_analytic for r in ok], "o-", label="closed form")
    numeric = [(r.axis_value, r.d_eff_numeric) for r in ok if r.d_eff_numeric is not None]
    if numeric:
        ax.plot(*zip(*numeric), "s--", label="simulated")
    if len(xs) > 1 and xs.min() > 0 and xs.max() / xs.min() > 20:
        ax.set_xscale("log")
        ax.set_yscale("log")
    ax.set_xlabel(table.axis)
    ax.set_ylabel("per-step decoherence exponent")
    ax.legend(loc="best", fontsize=9)
    ax.grid(alpha=0.3, which="both")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return Path(path)


def thermal_samples_figure(d_eff_values, d01_analytic: float, path: Path) -> Path:
    """Per-sample exponents against the closed-form prediction."""
    values = np.asarray(d_eff_values, dtype=float)
    fig, ax = plt.subplots(figsize=(6.5, 4.0))
    ax.plot(np.arange(len(values)), values, "o", ms=4, label="sampled runs")
    ax.axhline(d01_analytic, color="tab:red", lw=1.2, label="closed form")
    mean = values.mean()
    ax.axhline(mean, color="tab:green", lw=1.0, ls="--",
               label=f"sample mean = {mean:.4g}")
    ax.set_xlabel("sample index")
    ax.set_ylabel("effective per-step exponent")
    ax.legend(loc="best", fontsize=8)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return Path(path)


def feasibility_figure(report: FeasibilityReport, path: Path) -> Path:
    """Condition ratios on a log axis, colored by verdict."""
    conditions = report.conditions()
    fig, ax = plt.subplots(figsize=(6.5, 0.8 + 0.6 * len(conditions)))
    names = [c.name for c in conditions]
    ratios = [c.ratio if math.isfinite(c.ratio) else np.nan for c in conditions]
    colors = ["tab:green" if c.passed else "tab:red" for c in conditions]
    ys = np.arange(len(conditions))
    ax.barh(ys, ratios, color=colors, alpha=0.75)
    ax.set_yticks(ys)
    ax.set_yticklabels(names)
    ax.set_xscale("log")
    ax.set_xlabel("condition ratio")
    ax.grid(alpha=0.3, axis="x")
    for y, c in zip(ys, conditions):
        note = f"{c.ratio:.3g}" + ("" if c.passed else "  (fail)")
        ax.annotate(note, (1.0, y), xytext=(4, 0), textcoords="offset points",
                    va="center", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return Path(path)
