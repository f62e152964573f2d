"""Report figures rendered to files alongside the JSON/CSV outputs."""
from __future__ import annotations

from pathlib import Path
from typing import Mapping

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .estimation import FitResult
from .inference import BootstrapReport
from .reliability import ReliabilityDecomposition

__all__ = ["save_transition_heatmaps", "save_bootstrap_histogram", "save_reliability_bars"]


def save_transition_heatmaps(fit: FitResult, group_labels, path: str | Path) -> Path:
    """One annotated heatmap per group and occasion pair of the transition matrices."""
    tau = fit.params.tau
    n_trans, H, A, _ = tau.shape
    fig, axes = plt.subplots(
        H, max(n_trans, 1), figsize=(3.2 * max(n_trans, 1), 2.8 * H), squeeze=False
    )
    for h in range(H):
        for t in range(n_trans):
            ax = axes[h][t]
            ax.imshow(tau[t, h], cmap="Blues", vmin=0.0, vmax=1.0)
            for a in range(A):
                for b in range(A):
                    v = tau[t, h, a, b]
                    ax.text(b, a, f"{v:.2f}", ha="center", va="center",
                            color="white" if v > 0.6 else "black", fontsize=9)
            ax.set_title(f"{group_labels[h]}: t{t + 1} to t{t + 2}", fontsize=10)
            ax.set_xlabel("class at later stage")
            if t == 0:
                ax.set_ylabel("class at earlier stage")
            ax.set_xticks(range(A), [str(a + 1) for a in range(A)])
            ax.set_yticks(range(A), [str(a + 1) for a in range(A)])
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_bootstrap_histogram(report: BootstrapReport, path: str | Path, df: int | None = None) -> Path:
    """Histogram of replicate likelihood-ratio statistics with the observed value marked."""
    lrs = report.replicate_lrs
    finite = lrs[np.isfinite(lrs)]
    fig, ax = plt.subplots(figsize=(5.5, 3.5))
    ax.hist(finite, bins=min(40, max(10, report.B // 10)), color="#7da7d9", edgecolor="white")
    ax.axvline(report.observed_lr, color="firebrick", linestyle="--",
               label=f"observed = {report.observed_lr:.2f}")
    if df is not None:
        ax.axvline(df, color="gray", linestyle=":", label=f"df = {df}")
    ax.set_xlabel("replicate likelihood-ratio statistic")
    ax.set_ylabel("count")
    ax.set_title(f"bootstrap null distribution (B = {report.B}, p = {report.p_value:.3f})")
    ax.legend(fontsize=8)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_reliability_bars(
    decomps: Mapping[str, ReliabilityDecomposition], path: str | Path
) -> Path:
    """Stacked true/error bars for the stability and change parts, per group."""
    labels = list(decomps)
    fig, ax = plt.subplots(figsize=(1.8 + 2.2 * len(labels), 3.8))
    width = 0.35
    for i, label in enumerate(labels):
        d = decomps[label]
        for off, true, err, part in (
            (-width / 2, d.true_stability, d.error_stability, "stability"),
            (+width / 2, d.true_change, d.error_change, "change"),
        ):
            x = i + off
            ax.bar(x, true, width, color="#4c72b0" if part == "stability" else "#55a868")
            ax.bar(x, err, width, bottom=true, color="#c44e52")
            ax.text(x, true + err + 0.01, part, ha="center", fontsize=7, rotation=90)
    ax.set_xticks(range(len(labels)), labels)
    ax.set_ylabel("proportion of total mass")
    ax.set_ylim(0, 1.0)
    ax.set_title("true (blue/green) vs measurement-error (red) components")
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
