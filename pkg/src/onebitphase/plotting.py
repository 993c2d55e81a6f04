"""Render estimation-error sweep curves to an image file.

The figure follows the usual presentation of such studies: Es/N0 on the
x axis, the mean squared phase error on a log y axis, one marker per
algorithm and one color per interpolation mode.
"""

from __future__ import annotations

import csv

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .experiments import CSV_HEADER, SweepRow

__all__ = ["read_rows_csv", "plot_rows", "plot_sweep"]

_MARKERS = {"ls": "o", "em": "x", "scoring": "d"}
_COLORS = {
    "pilot_only": "#0072bd",
    "kalman": "#edb120",
    "rts": "#d95319",
}


def read_rows_csv(path) -> list[SweepRow]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        if header != CSV_HEADER:
            raise ValueError(f"unexpected CSV header {header!r}")
        return [
            SweepRow(float(e), a, i, float(m), float(s), int(t))
            for e, a, i, m, s, t in reader
        ]


def plot_rows(rows, path, title: str | None = None) -> None:
    """Write the curves in ``rows`` to ``path`` (format by file extension)."""
    fig, ax = plt.subplots(figsize=(7.0, 4.2))
    groups: dict[tuple[str, str], list[SweepRow]] = {}
    for row in rows:
        groups.setdefault((row.algorithm, row.interpolator), []).append(row)
    for (algo, interp), g in sorted(groups.items()):
        g = sorted(g, key=lambda r: r.esn0_db)
        ax.semilogy(
            [r.esn0_db for r in g],
            [r.mse for r in g],
            marker=_MARKERS.get(algo, "s"),
            color=_COLORS.get(interp, "#555555"),
            markerfacecolor="none",
            label=f"{algo} / {interp}",
        )
    ax.set_xlabel(r"$E_s/N_0$ [dB]")
    ax.set_ylabel(r"mean squared phase error [rad$^2$]")
    ax.grid(True, which="both", alpha=0.4)
    ax.legend(fontsize=8, ncol=2)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_sweep(result, path, title: str | None = None) -> None:
    """Convenience wrapper taking a SweepResult."""
    plot_rows(result.rows, path, title=title)
