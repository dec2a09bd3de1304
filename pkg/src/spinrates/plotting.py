"""Standalone matplotlib scripts for data files written by the CLI."""

from __future__ import annotations

from . import datafile

_TEMPLATE = '''#!/usr/bin/env python3
"""Plot {source} ({command})."""
import csv

import matplotlib.pyplot as plt

DATA = {source!r}
STYLE = {style!r}
SERIES = {series!r}

with open(DATA, encoding="utf-8") as fh:
    rows = list(csv.reader(line for line in fh if not line.startswith("#")))
header, body = rows[0], rows[1:]


def column(name, subset):
    i = header.index(name)
    return [float(r[i]) if r[i] else float("nan") for r in subset]


fig, ax = plt.subplots(figsize=(7, 4.5))
for label, x_name, y_name, group in SERIES:
    subset = body if group is None else [r for r in body if r[0] == group]
    x, y = column(x_name, subset), column(y_name, subset)
    if STYLE == "step":
        ax.step(x, y, where="post", label=label)
    else:
        ax.plot(x, y, label=label)
ax.set_xlabel({xlabel!r})
ax.set_ylabel({ylabel!r})
ax.legend()
fig.tight_layout()
plt.show()
'''


def _series(command, columns, rows):
    """(label, x column, y column, group) tuples; group filters the first column."""
    if columns[:2] == ["series", "t_over_tau"]:
        groups = list(dict.fromkeys(r[0] for r in rows))
        out = []
        for g in groups:
            out.append((f"{g} Monte Carlo", "t_over_tau", "rate_instantaneous", g))
            out.append((f"{g} analytic", "t_over_tau", "analytic_rate", g))
        return out, "t / tau", "r(t)"
    x = columns[0]
    ys = [c for c in columns[1:] if not c.startswith("stderr") and c != "mass"]
    if command == "amplitudes":
        return [(y, x, y, None) for y in ys], "t", "probability"
    return [(y, x, y, None) for y in ys], x, "rate"


def plot_script(path, style="auto") -> str:
    """Script text plotting every data column of ``path`` against its first column."""
    manifest, columns, rows = datafile.read(path)
    command = manifest.command if manifest else "data"
    if style == "auto":
        style = "step" if command == "fig5" or columns[:1] == ["series"] else "line"
    series, xlabel, ylabel = _series(command, columns, rows)
    return _TEMPLATE.format(
        source=str(path), command=command, style=style, series=series, xlabel=xlabel, ylabel=ylabel
    )
