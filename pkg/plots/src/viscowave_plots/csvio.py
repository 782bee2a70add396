"""Readers for the simulation artifacts: CSV tables and flat manifests.

No numerical analysis happens here or anywhere in this package; slopes and
classifications are read from the files, never recomputed.
"""

from __future__ import annotations

import math
import os

import numpy as np


class RenderError(RuntimeError):
    """Unusable input or figure request; rendering writes no partial file."""


def read_table(path: str) -> dict[str, np.ndarray]:
    """Read a comma-separated table; 'NA' cells become NaN."""
    if not os.path.exists(path):
        raise RenderError(f"input file not found: {path}")
    with open(path, encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines:
        raise RenderError(f"empty CSV: {path}")
    header = lines[0].split(",")
    rows = [ln.split(",") for ln in lines[1:]]
    if not rows:
        raise RenderError(f"CSV has a header but no data rows: {path}")
    if any(len(r) != len(header) for r in rows):
        raise RenderError(f"ragged CSV rows in {path}")

    def cell(value: str) -> float:
        if value == "NA":
            return math.nan
        try:
            return float(value)
        except ValueError:
            return math.nan

    columns: dict[str, np.ndarray] = {}
    for j, name in enumerate(header):
        raw = [r[j] for r in rows]
        numeric = np.array([cell(v) for v in raw])
        # keep string columns (e.g. fit quantities) as strings
        if np.all(np.isnan(numeric)) and any(v not in ("", "NA") for v in raw):
            columns[name] = np.array(raw)
        else:
            columns[name] = numeric
    return columns


def require_columns(table: dict, names: list[str], path: str) -> None:
    missing = [n for n in names if n not in table]
    if missing:
        raise RenderError(f"{path} is missing required column(s) {missing}; has {sorted(table)}")


def read_manifest(path: str) -> dict[str, str]:
    if not os.path.exists(path):
        raise RenderError(f"manifest not found: {path}")
    entries: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#") or "=" not in line:
                continue
            key, _, value = line.partition("=")
            entries[key.strip()] = value.strip()
    return entries


def read_classification(path: str) -> list[dict[str, str]]:
    """Parse the sweep classification table (whitespace separated)."""
    if not os.path.exists(path):
        raise RenderError(f"input file not found: {path}")
    with open(path, encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if len(lines) < 2:
        raise RenderError(f"classification table {path} has no rows")
    header = lines[0].split()
    rows = []
    for ln in lines[1:]:
        cells = ln.split(None, len(header) - 1)
        if len(cells) < 4:
            raise RenderError(f"bad classification row in {path}: {ln!r}")
        rows.append(dict(zip(header, cells)))
    return rows


def split_inputs(inputs: tuple[str, ...]) -> tuple[list[str], str | None]:
    """Separate data inputs from an explicit or sibling manifest."""
    data = [p for p in inputs if os.path.basename(p) != "manifest.txt"]
    explicit = [p for p in inputs if os.path.basename(p) == "manifest.txt"]
    if explicit:
        return data, explicit[0]
    if data:
        sibling = os.path.join(os.path.dirname(os.path.abspath(data[0])), "manifest.txt")
        if os.path.exists(sibling):
            return data, sibling
    return data, None
