"""Figure builders for the four artifact kinds.

Rendering is deterministic: the SVG hash salt, font handling, and metadata
are pinned, so identical inputs give identical bytes.  Reference-line values
come from the run's own manifest/fits, never from constants baked in here.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .csvio import (
    RenderError,
    read_classification,
    read_manifest,
    read_table,
    require_columns,
    split_inputs,
)

KINDS = ("decay", "profile", "kr", "fujita-map")

_RC = {
    "svg.hashsalt": "viscowave-plots",
    "svg.fonttype": "none",
    "figure.figsize": (7.0, 4.5),
    "figure.dpi": 100,
    "savefig.dpi": 100,
}

_CLASS_COLORS = {
    "global-like": "#2a9d3a",
    "growing": "#e8a117",
    "blowup-detected": "#d62828",
}


@dataclass(frozen=True)
class FigureSpec:
    kind: str
    inputs: tuple[str, ...]
    output: str

    def validate(self) -> None:
        if self.kind not in KINDS:
            raise RenderError(f"unknown figure kind {self.kind!r}, expected one of {KINDS}")
        if not self.inputs:
            raise RenderError("no input files given")
        ext = os.path.splitext(self.output)[1].lower()
        if ext not in (".svg", ".png"):
            raise RenderError(f"output must be .svg or .png, got {self.output!r}")


def _save(fig, output: str) -> None:
    ext = os.path.splitext(output)[1].lower().lstrip(".")
    tmp = output + ".tmp"
    try:
        if ext == "svg":
            fig.savefig(tmp, format=ext, metadata={"Date": None})
        else:
            fig.savefig(tmp, format=ext)
        os.replace(tmp, output)
    finally:
        plt.close(fig)
        if os.path.exists(tmp):
            os.remove(tmp)


def _manifest_dimension(manifest: dict[str, str] | None, inputs) -> int:
    if manifest is None or "n" not in manifest:
        raise RenderError(
            f"need manifest.txt (with the dimension n) next to {inputs[0]} or passed explicitly"
        )
    return int(manifest["n"])


def _dk_order(name: str) -> float:
    return 0.0 if name == "l2" else float(name.split("_", 1)[1])


def _render_decay(spec: FigureSpec) -> None:
    data_inputs, manifest_path = split_inputs(spec.inputs)
    tables = [read_table(p) for p in data_inputs]
    obs = next((t for t in tables if "t" in t and "l2" in t), None)
    if obs is None:
        raise RenderError(f"none of {data_inputs} looks like observables.csv (needs t and l2)")
    obs_path = data_inputs[tables.index(obs)]
    require_columns(obs, ["t", "l2"], obs_path)
    fits = next((t for t in tables if "quantity" in t), None)
    manifest = read_manifest(manifest_path) if manifest_path else None
    n = _manifest_dimension(manifest, spec.inputs)

    fig, ax = plt.subplots()
    quantities = ["l2"] + sorted(q for q in obs if q.startswith("dk_"))
    t = obs["t"]
    for q in quantities:
        v = obs[q]
        good = np.isfinite(v) & (v > 0) & np.isfinite(t)
        if not np.any(good):
            continue
        (line,) = ax.loglog(1 + t[good], v[good], label=q, linewidth=1.6)
        line.set_gid(f"series-{q}")
        # reference decay t^(-n/4 - k/2), anchored at the last data point
        k = _dk_order(q)
        slope = -(n / 4.0) - k / 2.0
        tg, vg = (1 + t[good])[-1], v[good][-1]
        tref = np.geomspace(max((1 + t[good])[0], 1.0), tg, 50)
        (ref,) = ax.loglog(
            tref,
            vg * (tref / tg) ** slope,
            "--",
            color=line.get_color(),
            alpha=0.7,
            label=f"reference slope {slope:g}",
        )
        ref.set_gid(f"ref-{q}")
    if fits is not None:
        fitted = {
            q: s for q, s in zip(np.atleast_1d(fits["quantity"]), np.atleast_1d(fits["slope"]))
        }
        note = ", ".join(f"{q}: {float(s):.3f}" for q, s in fitted.items())
        ax.set_title(f"fitted slopes {note}", fontsize=9)
    ax.set_xlabel("1 + t")
    ax.set_ylabel("norm")
    ax.legend(fontsize=8)
    _save(fig, spec.output)


def _render_profile(spec: FigureSpec) -> None:
    data_inputs, _ = split_inputs(spec.inputs)
    path = data_inputs[0]
    table = read_table(path)
    require_columns(table, ["t", "k", "M_used", "error"], path)
    fig, ax = plt.subplots()
    keys = sorted(set(zip(table["k"], table["M_used"])))
    guide_drawn = False
    for k, m in keys:
        sel = (table["k"] == k) & (table["M_used"] == m)
        t, err = table["t"][sel], table["error"][sel]
        good = np.isfinite(err) & (err > 0)
        if not np.any(good):
            continue
        (line,) = ax.loglog(t[good], err[good], marker="o", ms=3,
                            label=f"k={k:g}, M={m:.6g}", linewidth=1.2)
        line.set_gid(f"series-k{k:g}")
        if not guide_drawn:
            guide = ax.axhline(err[good][0], ls=":", color="gray",
                               label="trend guide (initial level)")
            guide.set_gid("trend-guide")
            guide_drawn = True
    ax.set_xlabel("t")
    ax.set_ylabel("normalized profile error")
    ax.legend(fontsize=8)
    _save(fig, spec.output)


def _render_kr(spec: FigureSpec) -> None:
    data_inputs, _ = split_inputs(spec.inputs)
    path = data_inputs[0]
    table = read_table(path)
    require_columns(table, ["R", "K_R"], path)
    fig, ax = plt.subplots()
    radii = table["R"]
    positions = np.arange(len(radii))
    bars = ax.bar(positions, table["K_R"], color="#4464ad", width=0.6)
    for i, patch in enumerate(bars.patches):
        patch.set_gid(f"bar-kr-{i}")
    ax.set_xticks(positions, [f"{r:g}" for r in radii])
    ax.set_xlabel("R")
    ax.set_ylabel("K_R")
    if "annulus" in table:
        ax2 = ax.twinx()
        (ann,) = ax2.plot(positions, table["annulus"], "s--", color="#d62828",
                          ms=4, label="annulus integral")
        ann.set_gid("series-annulus")
        ax2.set_ylabel("annulus integral")
        ax2.legend(fontsize=8, loc="upper left")
    _save(fig, spec.output)


def _render_fujita_map(spec: FigureSpec) -> None:
    data_inputs, manifest_path = split_inputs(spec.inputs)
    rows = read_classification(data_inputs[0])
    manifest = read_manifest(manifest_path) if manifest_path else None
    n = _manifest_dimension(manifest, spec.inputs)
    p_threshold = 1.0 + 2.0 / n

    fig, ax = plt.subplots()
    seen = set()
    for row in rows:
        label = row["classification"]
        color = _CLASS_COLORS.get(label, "#666666")
        pt = ax.scatter(
            float(row["p"]), float(row["amp"]), c=color, s=90, marker="s",
            label=None if label in seen else label,
        )
        pt.set_gid(f"cell-p{row['p']}-amp{row['amp']}")
        seen.add(label)
    vline = ax.axvline(p_threshold, color="black", ls="--", linewidth=1.2)
    vline.set_gid("fujita-threshold")
    ax.text(p_threshold, ax.get_ylim()[1], f" p_F = {p_threshold:g}", va="top", fontsize=9)
    ax.set_yscale("log")
    ax.set_xlabel("p")
    ax.set_ylabel("amplitude")
    ax.legend(fontsize=8, loc="lower right")
    _save(fig, spec.output)


_RENDERERS = {
    "decay": _render_decay,
    "profile": _render_profile,
    "kr": _render_kr,
    "fujita-map": _render_fujita_map,
}


def render(spec: FigureSpec) -> str:
    """Render one figure per spec; returns the output path."""
    spec.validate()
    with plt.rc_context(_RC):
        _RENDERERS[spec.kind](spec)
    return spec.output
