"""Declarative experiment configuration and its flat key-value file format.

One config fully determines a run (seed-free).  The on-disk format is plain
``key = value`` lines so manifests stay diff-able; floats are written with
``repr`` so a round trip through text is lossless.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace

import numpy as np

from .propagators import gauss_field
from .spectral import Field, SpectralGrid, transition_bump

EXPERIMENTS = (
    "linear-decay",
    "profile",
    "nonlinear-decay",
    "fujita-sweep",
    "blowup-functional",
    "lemma-oracles",
)

COMPONENT_GAUSS = "gauss"
COMPONENT_BUMP = "bump"


class ConfigError(ValueError):
    """Invalid or malformed experiment configuration."""


@dataclass(frozen=True)
class DataComponent:
    """One additive piece of initial data: a heat kernel or a compact bump."""

    kind: str
    amplitude: float
    width: float
    center: tuple[float, ...] = (0.0,)

    def encode(self) -> str:
        parts = [self.kind, repr(float(self.amplitude)), repr(float(self.width))]
        parts += [repr(float(c)) for c in self.center]
        return ":".join(parts)

    @classmethod
    def decode(cls, text: str) -> "DataComponent":
        bits = text.split(":")
        if len(bits) < 4:
            raise ConfigError(f"bad data component {text!r}, expected kind:amp:width:center...")
        kind = bits[0]
        if kind not in (COMPONENT_GAUSS, COMPONENT_BUMP):
            raise ConfigError(f"unknown data component kind {kind!r}")
        try:
            amp, width = float(bits[1]), float(bits[2])
            center = tuple(float(b) for b in bits[3:])
        except ValueError as exc:
            raise ConfigError(f"bad numbers in data component {text!r}") from exc
        return cls(kind, amp, width, center)


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    n: int = 1
    p: float = 4.0
    form: str = "signed"
    N: int = 2048
    L: float = 100.0
    T: float = 50.0
    dt: float = 0.05
    sample_dt: float = 0.5
    k_list: tuple[float, ...] = (1.0,)
    amp: float = 1.0
    u0: tuple[DataComponent, ...] = ()
    u1: tuple[DataComponent, ...] = ()
    p_list: tuple[float, ...] = ()
    r_list: tuple[float, ...] = ()
    control_amp: float = 0.01
    snapshot_times: tuple[float, ...] = ()
    snapshot_dt: float | None = None
    growth_factor: float = 100.0
    dealias: bool = False
    boundary_guard: bool = True
    jobs: int = 1
    out_dir: str = "out"

    def validate(self) -> None:
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}, expected one of {EXPERIMENTS}")
        if self.n not in (1, 2):
            raise ConfigError(f"n must be 1 or 2, got {self.n}")
        if self.N < 8 or (self.N & (self.N - 1)) != 0:
            raise ConfigError(f"N must be a power of two >= 8, got {self.N}")
        for name in ("L", "T", "dt", "sample_dt"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise ConfigError(f"{name} must be positive, got {v}")
        if not self.p > 1:
            raise ConfigError(f"p must be > 1, got {self.p}")
        if self.form not in ("abs", "signed"):
            raise ConfigError(f"form must be 'abs' or 'signed', got {self.form!r}")
        if any(k < 0 for k in self.k_list):
            raise ConfigError("k values must be >= 0")
        if any(not q > 1 for q in self.p_list):
            raise ConfigError("p_list values must be > 1")
        if any(not r > 0 for r in self.r_list):
            raise ConfigError("R_list values must be > 0")
        if not math.isfinite(self.amp):
            raise ConfigError("amp must be finite")
        if self.jobs < 1:
            raise ConfigError(f"jobs must be >= 1, got {self.jobs}")
        if self.snapshot_dt is not None and not self.snapshot_dt > 0:
            raise ConfigError("snapshot_dt must be positive when set")
        if any(t < 0 or t > self.T for t in self.snapshot_times):
            raise ConfigError(f"snapshot_times must lie in [0, T = {self.T:g}]")
        if not self.growth_factor > 0:
            raise ConfigError("growth_factor must be positive")
        for comp in (*self.u0, *self.u1):
            if len(comp.center) != self.n:
                raise ConfigError(
                    f"component center {comp.center} has wrong dimension for n = {self.n}"
                )
            if not comp.width > 0:
                raise ConfigError(f"component width must be > 0, got {comp.width}")

    def data_components(self) -> tuple[tuple[DataComponent, ...], tuple[DataComponent, ...]]:
        """Configured data, or the amp * G_1 shorthand when none is given."""
        if self.u0 or self.u1:
            return self.u0, self.u1
        g1 = (DataComponent(COMPONENT_GAUSS, self.amp, 1.0, (0.0,) * self.n),)
        if self.experiment == "fujita-sweep":
            return g1, g1
        return g1, ()


# key in file <-> (field name, encoder, decoder)


def _enc_floats(ts) -> str:
    return ",".join(repr(float(t)) for t in ts)


def _dec_floats(text: str) -> tuple[float, ...]:
    text = text.strip()
    if not text:
        return ()
    try:
        return tuple(float(b) for b in text.split(","))
    except ValueError as exc:
        raise ConfigError(f"bad float list {text!r}") from exc


def _enc_components(cs) -> str:
    return "|".join(c.encode() for c in cs)


def _dec_components(text: str) -> tuple[DataComponent, ...]:
    text = text.strip()
    if not text:
        return ()
    return tuple(DataComponent.decode(b) for b in text.split("|"))


def _dec_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("true", "1", "yes"):
        return True
    if t in ("false", "0", "no"):
        return False
    raise ConfigError(f"bad boolean {text!r}")


def _dec_int(text: str) -> int:
    try:
        return int(text)
    except ValueError as exc:
        raise ConfigError(f"bad integer {text!r}") from exc


def _dec_float(text: str) -> float:
    try:
        return float(text)
    except ValueError as exc:
        raise ConfigError(f"bad float {text!r}") from exc


_CODECS = {
    "experiment": ("experiment", str, str.strip),
    "n": ("n", repr, _dec_int),
    "p": ("p", lambda v: repr(float(v)), _dec_float),
    "form": ("form", str, str.strip),
    "N": ("N", repr, _dec_int),
    "L": ("L", lambda v: repr(float(v)), _dec_float),
    "T": ("T", lambda v: repr(float(v)), _dec_float),
    "dt": ("dt", lambda v: repr(float(v)), _dec_float),
    "sample_dt": ("sample_dt", lambda v: repr(float(v)), _dec_float),
    "k": ("k_list", _enc_floats, _dec_floats),
    "amp": ("amp", lambda v: repr(float(v)), _dec_float),
    "u0": ("u0", _enc_components, _dec_components),
    "u1": ("u1", _enc_components, _dec_components),
    "p_list": ("p_list", _enc_floats, _dec_floats),
    "R_list": ("r_list", _enc_floats, _dec_floats),
    "control_amp": ("control_amp", lambda v: repr(float(v)), _dec_float),
    "snapshot_times": ("snapshot_times", _enc_floats, _dec_floats),
    "snapshot_dt": (
        "snapshot_dt",
        lambda v: "" if v is None else repr(float(v)),
        lambda t: None if not t.strip() else _dec_float(t),
    ),
    "growth_factor": ("growth_factor", lambda v: repr(float(v)), _dec_float),
    "dealias": ("dealias", lambda v: "true" if v else "false", _dec_bool),
    "boundary_guard": ("boundary_guard", lambda v: "true" if v else "false", _dec_bool),
    "jobs": ("jobs", repr, _dec_int),
    "out": ("out_dir", str, str.strip),
}

_FIELD_TO_KEY = {fieldname: key for key, (fieldname, _, _) in _CODECS.items()}

# parsing helpers shared with the CLI flag layer
parse_float_list = _dec_floats
parse_components = _dec_components


def config_to_text(config: ExperimentConfig) -> str:
    lines = []
    for f in fields(ExperimentConfig):
        key = _FIELD_TO_KEY[f.name]
        _, enc, _ = _CODECS[key]
        lines.append(f"{key} = {enc(getattr(config, f.name))}")
    return "\n".join(lines) + "\n"


def config_from_text(text: str) -> ExperimentConfig:
    values: dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, val = line.partition("=")
        key = key.strip()
        if key not in _CODECS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        fieldname, _, dec = _CODECS[key]
        values[fieldname] = dec(val)
    if "experiment" not in values:
        raise ConfigError("config is missing the 'experiment' key")
    return ExperimentConfig(**values)


def config_from_file(path) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        return config_from_text(fh.read())


def merge_overrides(config: ExperimentConfig, overrides: dict) -> ExperimentConfig:
    """Apply non-None override values (CLI flags win over file keys)."""
    updates = {name: v for name, v in overrides.items() if v is not None}
    return replace(config, **updates) if updates else config


def _component_values(grid: SpectralGrid, comp: DataComponent) -> np.ndarray:
    if comp.kind == COMPONENT_GAUSS:
        # width is the kernel time: amp * G_width(x - center)
        return gauss_field(grid, comp.width, comp.center, comp.amplitude).values
    if comp.kind == COMPONENT_BUMP:
        coords = grid.coords()
        r2 = sum((c - c0) ** 2 for c, c0 in zip(coords, comp.center))
        return comp.amplitude * transition_bump(np.sqrt(r2) / comp.width)
    raise ConfigError(f"unknown data component kind {comp.kind!r}")


def build_initial_data(config: ExperimentConfig, grid: SpectralGrid) -> tuple[Field, Field]:
    """Assemble (u0, u1) on the grid from the configured components."""
    comps0, comps1 = config.data_components()

    def assemble(comps):
        vals = np.zeros(grid.shape)
        for comp in comps:
            vals = vals + _component_values(grid, comp)
        return Field(grid, vals)

    return assemble(comps0), assemble(comps1)
