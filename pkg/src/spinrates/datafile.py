"""CSV data files with ``#``-prefixed manifest headers.

Layout::

    # command: fig2
    # params: {"j": 0.25, ...}
    # seed: none
    # version: 0.1.0
    # timestamp: 2026-01-01T00:00:00+00:00
    # output: fig2.csv
    tau,plain_n0,...
    0.05000000000000000,0,...

Floats are written with 17 significant digits so they round-trip exactly;
missing values are empty cells.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field

MANIFEST_KEYS = ("command", "params", "seed", "version", "timestamp", "output")


class DataFileError(ValueError):
    def __init__(self, path, line, message):
        super().__init__(f"{path}:{line}: {message}")
        self.path = path
        self.line = line


@dataclass
class Manifest:
    command: str
    params: dict
    seed: int | None
    version: str
    timestamp: str
    output: str
    extra: dict = field(default_factory=dict)

    def lines(self):
        out = [
            f"command: {self.command}",
            f"params: {json.dumps(self.params, sort_keys=True)}",
            f"seed: {'none' if self.seed is None else self.seed}",
            f"version: {self.version}",
            f"timestamp: {self.timestamp}",
            f"output: {self.output}",
        ]
        out += [f"{k}: {v}" for k, v in self.extra.items()]
        return ["# " + line for line in out]


def format_value(x) -> str:
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    if isinstance(x, (int,)) and not isinstance(x, bool):
        return str(x)
    x = float(x)
    if math.isnan(x):
        return ""
    return format(x, ".17g")


def render(manifest: Manifest, columns, rows) -> str:
    buf = io.StringIO()
    for line in manifest.lines():
        buf.write(line + "\n")
    buf.write(",".join(columns) + "\n")
    for row in rows:
        buf.write(",".join(format_value(v) for v in row) + "\n")
    return buf.getvalue()


def _parse_cell(cell):
    if cell == "":
        return math.nan
    try:
        return float(cell)
    except ValueError:
        return cell


def parse(text: str, path: str = "<data>"):
    """Return (manifest, columns, rows); raises DataFileError naming the bad line."""
    header = {}
    columns = None
    rows = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        if raw.startswith("#"):
            if columns is not None:
                raise DataFileError(path, lineno, "manifest line after the column header")
            key, sep, value = raw[1:].strip().partition(":")
            if not sep:
                raise DataFileError(path, lineno, f"malformed manifest line {raw!r}")
            header[key.strip()] = value.strip()
            continue
        if not raw.strip():
            continue
        cells = raw.split(",")
        if columns is None:
            columns = cells
            continue
        if len(cells) != len(columns):
            raise DataFileError(path, lineno, f"expected {len(columns)} fields, found {len(cells)}")
        row = [_parse_cell(c) for c in cells]
        # only the leading column may carry labels
        for name, value in zip(columns[1:], row[1:]):
            if isinstance(value, str):
                raise DataFileError(path, lineno, f"non-numeric value {value!r} in column {name!r}")
        rows.append(row)
    if columns is None:
        raise DataFileError(path, 1, "no column header found")
    manifest = None
    if all(k in header for k in MANIFEST_KEYS):
        try:
            params = json.loads(header["params"])
        except json.JSONDecodeError as exc:
            raise DataFileError(path, 2, f"params are not valid JSON: {exc}") from exc
        seed = None if header["seed"] == "none" else int(header["seed"])
        extra = {k: v for k, v in header.items() if k not in MANIFEST_KEYS}
        manifest = Manifest(
            header["command"], params, seed, header["version"], header["timestamp"], header["output"], extra
        )
    return manifest, columns, rows


def read(path):
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read(), str(path))
