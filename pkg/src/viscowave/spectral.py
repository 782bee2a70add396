"""Periodic spectral grids with continuum-scaled Fourier transforms.

The whole-space problem is approximated on the torus [-L, L)^n.  Forward
transforms carry the scaling

    coef(xi) ~ (2*pi)^(-n/2) * integral e^(-i x.xi) f(x) dx,

so that closed-form transforms (e.g. the heat kernel) hold verbatim on the
frequency lattice xi = (pi/L) * m, and Parseval holds exactly between the
mesh-weighted physical L2 norm and the lattice-weighted spectral one.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

BAND_LOW = "low"
BAND_MID = "mid"
BAND_HIGH = "high"
BANDS = (BAND_LOW, BAND_MID, BAND_HIGH)


def transition_bump(sigma):
    """Smooth monotone step from 1 at sigma<=0 to 0 at sigma>=1.

    B(sigma) = exp(-sigma^2 / (1 - sigma^2)); all cutoff transitions
    (frequency bands, spatial and temporal cutoffs) reuse this profile.
    """
    sigma = np.asarray(sigma, dtype=float)
    out = np.zeros_like(sigma)
    out[sigma <= 0.0] = 1.0
    inside = (sigma > 0.0) & (sigma < 1.0)
    si = sigma[inside]
    out[inside] = np.exp(-si * si / (1.0 - si * si))
    return out


def transition_bump_d1(sigma):
    """First derivative of transition_bump (zero outside the transition)."""
    sigma = np.asarray(sigma, dtype=float)
    out = np.zeros_like(sigma)
    inside = (sigma > 0.0) & (sigma < 1.0)
    si = sigma[inside]
    q = 1.0 - si * si
    out[inside] = -2.0 * si / (q * q) * np.exp(-si * si / q)
    return out


def transition_bump_d2(sigma):
    """Second derivative of transition_bump (zero outside the transition)."""
    sigma = np.asarray(sigma, dtype=float)
    out = np.zeros_like(sigma)
    inside = (sigma > 0.0) & (sigma < 1.0)
    si = sigma[inside]
    q = 1.0 - si * si
    b = np.exp(-si * si / q)
    out[inside] = (4.0 * si * si / q**4 - 2.0 * (1.0 + 3.0 * si * si) / q**3) * b
    return out


@dataclass(frozen=True)
class SpectralGrid:
    """Uniform periodic discretization of [-L, L)^n with its frequency lattice.

    Attributes
    ----------
    dim : int
        Spatial dimension, 1 or 2.
    points_per_axis : int
        Points per axis N (power of two, >= 8).
    half_width : float
        Box half-width L; the mesh is dx = 2L/N and the frequency lattice is
        xi_m = (pi/L) m for integer m in [-N/2, N/2), stored in FFT order.
    """

    dim: int
    points_per_axis: int
    half_width: float
    # Derived arrays, filled in __post_init__ and treated as immutable.
    dx: float = field(init=False, repr=False, compare=False)
    dxi: float = field(init=False, repr=False, compare=False)
    cn: float = field(init=False, repr=False, compare=False)
    x1d: np.ndarray = field(init=False, repr=False, compare=False)
    xi1d: np.ndarray = field(init=False, repr=False, compare=False)
    s: np.ndarray = field(init=False, repr=False, compare=False)
    abs_xi: np.ndarray = field(init=False, repr=False, compare=False)
    phase: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        n, big_n, half = self.dim, self.points_per_axis, self.half_width
        if n not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {n}")
        if big_n < 8 or (big_n & (big_n - 1)) != 0:
            raise ValueError(f"points_per_axis must be a power of two >= 8, got {big_n}")
        if not (half > 0 and np.isfinite(half)):
            raise ValueError(f"half_width must be positive and finite, got {half}")
        dx = 2.0 * half / big_n
        m = np.arange(big_n)
        m = np.where(m < big_n // 2, m, m - big_n)  # FFT-order signed integers
        xi1d = (np.pi / half) * m
        x1d = -half + dx * np.arange(big_n)
        alt = np.where(np.arange(big_n) % 2 == 0, 1.0, -1.0)
        if n == 1:
            s = xi1d * xi1d
            phase = alt
        else:
            s = xi1d[:, None] ** 2 + xi1d[None, :] ** 2
            phase = alt[:, None] * alt[None, :]
        object.__setattr__(self, "dx", dx)
        object.__setattr__(self, "dxi", np.pi / half)
        object.__setattr__(self, "cn", (2.0 * np.pi) ** (-n / 2.0))
        object.__setattr__(self, "x1d", x1d)
        object.__setattr__(self, "xi1d", xi1d)
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "abs_xi", np.sqrt(s))
        object.__setattr__(self, "phase", phase)

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.points_per_axis,) * self.dim

    @property
    def cell_volume(self) -> float:
        return self.dx**self.dim

    @property
    def freq_cell_volume(self) -> float:
        return self.dxi**self.dim

    def coords(self) -> tuple[np.ndarray, ...]:
        """Coordinate arrays (meshgrid, 'ij' indexing) of the physical mesh."""
        if self.dim == 1:
            return (self.x1d,)
        return tuple(np.meshgrid(self.x1d, self.x1d, indexing="ij"))

    def radius_squared(self) -> np.ndarray:
        """|x|^2 on the physical mesh."""
        coords = self.coords()
        return sum(c * c for c in coords)


def make_grid(n: int, N: int, L: float) -> SpectralGrid:
    """Build a SpectralGrid; rejects non-power-of-two N, n not in {1,2}, L <= 0."""
    return SpectralGrid(dim=n, points_per_axis=N, half_width=float(L))


@dataclass(frozen=True)
class Field:
    """Real scalar samples on the physical mesh of a grid."""

    grid: SpectralGrid
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != self.grid.shape:
            raise ValueError(f"field shape {self.values.shape} != grid shape {self.grid.shape}")


@dataclass(frozen=True)
class Spectrum:
    """Complex coefficients on the frequency lattice, FFT order, continuum scaling."""

    grid: SpectralGrid
    coef: np.ndarray

    def __post_init__(self):
        if self.coef.shape != self.grid.shape:
            raise ValueError(f"spectrum shape {self.coef.shape} != grid shape {self.grid.shape}")


def _reflect(a: np.ndarray) -> np.ndarray:
    # index map m -> -m mod N on every axis
    out = a
    for ax in range(a.ndim):
        out = np.roll(np.flip(out, axis=ax), 1, axis=ax)
    return out


def hermitianize(coef: np.ndarray) -> np.ndarray:
    """Project onto conjugate-symmetric coefficients (real physical field)."""
    return 0.5 * (coef + np.conj(_reflect(coef)))


def transform(f: Field) -> Spectrum:
    """Forward transform with continuum scaling c_n * dx^n * sum e^(-i x.xi) f(x)."""
    if not np.all(np.isfinite(f.values)):
        raise ValueError("non-finite field values")
    g = f.grid
    coef = (g.cn * g.cell_volume) * g.phase * np.fft.fftn(f.values)
    return Spectrum(g, coef)


def inverse_transform(s: Spectrum) -> Field:
    """Inverse of transform; returns the real part (real-field convention)."""
    if not np.all(np.isfinite(s.coef)):
        raise ValueError("non-finite spectral coefficients")
    g = s.grid
    vals = np.fft.ifftn(s.coef * g.phase).real / (g.cn * g.cell_volume)
    return Field(g, vals)


def fractional_derivative(s: Spectrum, k: float) -> Spectrum:
    """Multiply coefficients by |xi|^k; k = 0 is the identity."""
    if k < 0:
        raise ValueError(f"derivative order must be >= 0, got {k}")
    if k == 0:
        return Spectrum(s.grid, s.coef.copy())
    return Spectrum(s.grid, s.coef * s.grid.abs_xi**k)


def chi_low(r):
    """Low-pass cutoff: 1 for |xi| <= 1/2, 0 for |xi| >= 3/4."""
    return transition_bump((np.asarray(r, dtype=float) - 0.5) * 4.0)


def chi_high(r):
    """High-pass cutoff: 0 for |xi| <= 2, 1 for |xi| >= 3."""
    return transition_bump(3.0 - np.asarray(r, dtype=float))


def chi_mid(r):
    """Middle cutoff, defined so the three bands sum to one pointwise."""
    return 1.0 - chi_low(r) - chi_high(r)


_BAND_FUNCS = {BAND_LOW: chi_low, BAND_MID: chi_mid, BAND_HIGH: chi_high}


def band_multiplier(grid: SpectralGrid, band: str) -> np.ndarray:
    if band not in _BAND_FUNCS:
        raise ValueError(f"unknown band {band!r}, expected one of {BANDS}")
    return _BAND_FUNCS[band](grid.abs_xi)


def band_filter(s: Spectrum, band: str) -> Spectrum:
    """Pointwise multiply by the band's cutoff chi(|xi|)."""
    return Spectrum(s.grid, s.coef * band_multiplier(s.grid, band))


def l2_norm(s: Spectrum, k: float = 0.0) -> float:
    """L2 norm of |grad|^k applied to the field, evaluated on the lattice."""
    if k < 0:
        raise ValueError(f"derivative order must be >= 0, got {k}")
    g = s.grid
    w = np.abs(s.coef) ** 2
    if k != 0:
        w = w * g.s**k
    return float(np.sqrt(np.sum(w) * g.freq_cell_volume))


def l1_norm(f: Field) -> float:
    return float(np.sum(np.abs(f.values)) * f.grid.cell_volume)


def sup_norm(f: Field) -> float:
    return float(np.max(np.abs(f.values)))


def mass(f: Field) -> float:
    """Mesh-weighted integral of the field over the box."""
    return float(np.sum(f.values) * f.grid.cell_volume)


def norms(f: Field, k: float = 0.0) -> tuple[float, float, float]:
    """(||grad^k f||_2, ||f||_1, ||f||_inf); the L2 part goes through the spectrum."""
    return l2_norm(transform(f), k), l1_norm(f), sup_norm(f)
