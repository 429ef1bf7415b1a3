"""Figures for evaluation reports."""

from __future__ import annotations

from typing import Sequence

from matplotlib.figure import Figure

from .pipeline import EvalRow


def report_figure(rows: Sequence[EvalRow]) -> Figure:
    """Ambiguity and error rate per configuration, side by side."""
    labels = [r.label for r in rows]
    x = range(len(rows))
    fig = Figure(figsize=(9, 3.6))
    ax_amb, ax_rpw, ax_err = fig.subplots(1, 3)

    ax_amb.bar(x, [r.ambiguous_pct for r in rows], color="0.55")
    ax_amb.set_title("Ambiguous words (%)")
    ax_rpw.bar(x, [r.readings_per_word for r in rows], color="0.35")
    ax_rpw.set_title("Readings / word")
    ax_rpw.set_ylim(bottom=min(1.0, *(r.readings_per_word for r in rows)) * 0.98)
    ax_err.bar(x, [r.error_rate_pct for r in rows], color="firebrick")
    ax_err.set_title("Error rate (%)")

    for ax in (ax_amb, ax_rpw, ax_err):
        ax.set_xticks(list(x))
        ax.set_xticklabels(labels, rotation=45, ha="right")
        ax.spines["top"].set_visible(False)
        ax.spines["right"].set_visible(False)
    fig.tight_layout()
    return fig


def save_report_figure(rows: Sequence[EvalRow], path) -> None:
    fig = report_figure(rows)
    fig.savefig(path, dpi=150)
