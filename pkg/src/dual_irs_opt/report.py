"""Figure rendering for the CLI report path (optional, file output only)."""
from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .bench import SweepRow  # noqa: E402


def save_sweep_figure(rows: Sequence[SweepRow], path: Path, xlabel: str,
                      title: str) -> None:
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.semilogx([r.value for r in rows], [r.rate for r in rows],
                marker="o", base=2 if xlabel.startswith("total") else 10)
    ax.set_xlabel(xlabel)
    ax.set_ylabel("rate (bps/Hz)")
    ax.set_title(title)
    ax.grid(True, linestyle=":", linewidth=0.7)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_bars_figure(labels: Sequence[str], values: Sequence[float],
                     path: Path, title: str) -> None:
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.bar(range(len(labels)), values, color="C0")
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels(labels, rotation=20, ha="right")
    ax.set_ylabel("min rate (bps/Hz)")
    ax.set_title(title)
    ax.grid(True, axis="y", linestyle=":", linewidth=0.7)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_trace_figure(trace: Sequence[float], path: Path, title: str) -> None:
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.plot(range(1, len(trace) + 1), trace, marker="o")
    ax.set_xlabel("outer iteration")
    ax.set_ylabel("min rate (bps/Hz)")
    ax.set_title(title)
    ax.grid(True, linestyle=":", linewidth=0.7)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
