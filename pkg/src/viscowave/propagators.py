"""Per-frequency propagators of the doubly damped wave equation.

Each Fourier mode solves the overdamped oscillator

    w'' + (1 + s) w' + s w = 0,          s = |xi|^2,

whose characteristic roots are real: lambda_+ = max(-s, -1),
lambda_- = min(-s, -1).  The displacement/velocity propagators are

    K0(t, s) = (e^(-t s) - s e^(-t)) / (1 - s),
    K1(t, s) = (e^(-t s) - e^(-t)) / (1 - s),

with a removable singularity at the double root s = 1 where
K1 -> t e^(-t) and K0 -> (1 + t) e^(-t).  Everything reduces to K1 through
the exact identities

    K0 = e^(-t) + K1,    dK0/dt = -s K1,    dK1/dt = e^(-t) - s K1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spectral import Field, SpectralGrid, Spectrum, inverse_transform

# |1 - s| below this evaluates K1 through the series kernel phi1.
SINGULAR_BAND = 1e-4
# |z| below this uses the Taylor form of phi1 instead of expm1(z)/z.
PHI1_TAYLOR = 1e-8


def phi1(z):
    """(e^z - 1)/z with a Taylor fallback near z = 0; phi1(0) = 1."""
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    small = np.abs(z) < PHI1_TAYLOR
    zs = z[small]
    out[small] = 1.0 + zs / 2.0 + zs * zs / 6.0
    zb = z[~small]
    out[~small] = np.expm1(zb) / zb
    return out


def _check_ts(t: float, s) -> np.ndarray:
    if not (np.isscalar(t) or np.ndim(t) == 0) or t < 0:
        raise ValueError(f"time must be a scalar >= 0, got {t!r}")
    s = np.asarray(s, dtype=float)
    if np.any(s < 0):
        raise ValueError("s = |xi|^2 must be >= 0")
    return s


def k1_values(t: float, s) -> np.ndarray:
    """K1(t, s), stable across the double root at s = 1.

    Away from s = 1 the closed form is factored through expm1 so the
    difference of exponentials never cancels; inside |1-s| < SINGULAR_BAND
    the series kernel e^(-t) * t * phi1(t(1-s)) takes over.
    """
    t = float(t)
    s = _check_ts(t, s)
    d = 1.0 - s
    z = t * d
    out = np.empty_like(s)
    et = np.exp(-t)

    near = np.abs(d) < SINGULAR_BAND
    if np.any(near):
        # clip: for t(1-s) > 700 both exponentials underflow and K1 is 0
        zn = np.minimum(z[near], 700.0)
        out[near] = et * t * phi1(zn)

    far = ~near
    if np.any(far):
        df, zf, sf = d[far], z[far], s[far]
        num = np.empty_like(df)
        cancel = np.abs(zf) <= 1.0
        num[cancel] = et * np.expm1(zf[cancel])
        num[~cancel] = np.exp(-t * sf[~cancel]) - et
        out[far] = num / df
    return out


def propagator_entries(t: float, s) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """(K0, K1, dK0/dt, dK1/dt) at scalar t over an array of s values."""
    k1 = k1_values(t, s)
    s = np.asarray(s, dtype=float)
    et = np.exp(-float(t))
    k0 = et + k1
    dt_k0 = -(s * k1)
    dt_k1 = et - s * k1
    return k0, k1, dt_k0, dt_k1


@dataclass(frozen=True)
class PropagatorMatrix:
    """The 2x2 multiplier [K0, K1; dK0/dt, dK1/dt] at one (t, s)."""

    k0: float
    k1: float
    dt_k0: float
    dt_k1: float


def propagator(t: float, s: float) -> PropagatorMatrix:
    """Evaluate the propagator matrix at scalar (t, s); rejects negatives."""
    k0, k1, d0, d1 = propagator_entries(float(t), np.array(float(s)))
    return PropagatorMatrix(float(k0), float(k1), float(d0), float(d1))


@dataclass(frozen=True)
class CharacteristicRoots:
    lambda_plus: float
    lambda_minus: float


def roots(s: float) -> CharacteristicRoots:
    """Characteristic roots at s = |xi|^2: lambda_+ = max(-s,-1), lambda_- = min(-s,-1)."""
    if s < 0:
        raise ValueError(f"s must be >= 0, got {s}")
    return CharacteristicRoots(max(-s, -1.0), min(-s, -1.0))


def heat_multiplier(t: float, s):
    """Heat semigroup multiplier e^(-t s)."""
    s = _check_ts(t, s)
    return np.exp(-float(t) * s)


def gauss_point(t: float, x):
    """Heat kernel (4 pi t)^(-n/2) e^(-|x|^2 / 4t) at points x of shape (..., n)."""
    if t <= 0:
        raise ValueError(f"kernel time must be > 0, got {t}")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    n = x.shape[-1]
    r2 = np.sum(x * x, axis=-1)
    return (4.0 * np.pi * t) ** (-n / 2.0) * np.exp(-r2 / (4.0 * t))


def gauss_field(grid: SpectralGrid, t: float, center=None, amplitude: float = 1.0) -> Field:
    """Heat kernel sampled on the mesh, optionally shifted and scaled."""
    if t <= 0:
        raise ValueError(f"kernel time must be > 0, got {t}")
    coords = grid.coords()
    if center is None:
        center = (0.0,) * grid.dim
    r2 = sum((c - c0) ** 2 for c, c0 in zip(coords, center))
    vals = amplitude * (4.0 * np.pi * t) ** (-grid.dim / 2.0) * np.exp(-r2 / (4.0 * t))
    return Field(grid, vals)


def gauss_spectrum(t: float, grid: SpectralGrid) -> Spectrum:
    """Exact lattice spectrum c_n e^(-t |xi|^2) of the (periodized) heat kernel."""
    if t <= 0:
        raise ValueError(f"kernel time must be > 0, got {t}")
    return Spectrum(grid, (grid.cn * np.exp(-t * grid.s)).astype(complex))


@dataclass(frozen=True)
class State:
    """Spectral phase point (u_hat, du/dt_hat) at a time t."""

    time: float
    u_hat: Spectrum
    ut_hat: Spectrum

    def __post_init__(self):
        if self.u_hat.grid is not self.ut_hat.grid and self.u_hat.grid != self.ut_hat.grid:
            raise ValueError("u_hat and ut_hat live on different grids")
        if self.time < 0:
            raise ValueError(f"time must be >= 0, got {self.time}")

    @property
    def grid(self) -> SpectralGrid:
        return self.u_hat.grid

    def displacement(self) -> Field:
        return inverse_transform(self.u_hat)


def apply_linear(state: State, t: float) -> State:
    """Propagate the phase pair exactly by time t under the linear flow."""
    if t < 0:
        raise ValueError(f"time increment must be >= 0, got {t}")
    g = state.grid
    k0, k1, d0, d1 = propagator_entries(t, g.s)
    u = state.u_hat.coef
    v = state.ut_hat.coef
    return State(
        time=state.time + t,
        u_hat=Spectrum(g, k0 * u + k1 * v),
        ut_hat=Spectrum(g, d0 * u + d1 * v),
    )


class PropagatorTable:
    """Per-grid multiplier tables for one step size, shared across steps.

    Immutable after construction; holds the full-step matrix entries and the
    half-step Duhamel kernels used by the corrector.
    """

    def __init__(self, grid: SpectralGrid, h: float):
        if h <= 0:
            raise ValueError(f"step size must be > 0, got {h}")
        self.grid = grid
        self.h = float(h)
        self.k0, self.k1, self.dt_k0, self.dt_k1 = propagator_entries(h, grid.s)
        self.k1_half = k1_values(h / 2.0, grid.s)
        self.dt_k1_half = np.exp(-h / 2.0) - grid.s * self.k1_half
