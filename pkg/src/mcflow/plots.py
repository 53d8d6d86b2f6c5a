"""Render preset tables to PNG files.

Rendering is a courtesy on top of the CSV datasets: every chart is derived
from the already-written table, so the CSV stays the artifact of record.
"""

from __future__ import annotations

from pathlib import Path
from typing import Optional

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .presets import PlotHint, TableSpec

__all__ = ["render_table"]


def _numeric_columns(table: TableSpec):
    cols = {}
    for idx, name in enumerate(table.columns):
        values = []
        for row in table.rows:
            try:
                values.append(float(row[idx]))
            except (TypeError, ValueError):
                return None  # non-numeric table (marker labels etc.)
        cols[name] = np.asarray(values)
    return cols


def render_table(table: TableSpec, png_path: Path) -> Optional[Path]:
    """Write table.name + '.png'; returns the path, or None when the table
    carries no plot hint or has non-numeric cells."""
    hint = table.plot
    if hint is None or hint.kind == "none":
        return None
    cols = _numeric_columns(table)
    if cols is None or len(table.columns) < 2:
        return None

    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    x_name = table.columns[0]

    if hint.kind == "roc":
        # paired pfa_tag / pd_tag columns share a hidden threshold axis;
        # a single bare pfa/pd pair is the untagged variant of the same thing
        pairs = [
            (c, f"pd_{c[len('pfa_'):]}", c[len("pfa_"):])
            for c in table.columns
            if c.startswith("pfa_")
        ]
        if "pfa" in table.columns and "pd" in table.columns:
            pairs.insert(0, ("pfa", "pd", "roc"))
        for pfa_name, pd_name, tag in pairs:
            pfa = cols.get(pfa_name)
            pd = cols.get(pd_name)
            if pfa is None or pd is None:
                continue
            order = np.argsort(pfa)
            ax.plot(pfa[order], pd[order], label=tag)
    else:
        x = cols[x_name]
        for name in table.columns[1:]:
            y = cols[name]
            mask = np.isfinite(x) & np.isfinite(y)
            if hint.logy:
                mask &= y > 0.0
            ax.plot(x[mask], y[mask], label=name)

    if hint.logx:
        ax.set_xscale("log")
    if hint.logy:
        ax.set_yscale("log")
    ax.set_xlabel(hint.xlabel or x_name)
    ax.set_ylabel(hint.ylabel or "value")
    ax.set_title(table.name)
    ax.grid(True, alpha=0.3)
    if len(table.columns) <= 20:
        ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(png_path, dpi=130)
    plt.close(fig)
    return png_path
