"""Test-function machinery for the non-existence regime.

Smooth compactly supported cutoffs phi_R (spatial, plateau |x| <= R/2,
support |x| <= R) and eta_R (temporal, plateau t <= R^2/4, support
t <= R^2) weight the space-time functional

    K_R = integral_0^(R^2) integral |u|^p phi_R^p' eta_R^p' dx dt,

whose boundedness in R contradicts its R-independent lower bound in the
subcritical regime.  The cutoff transitions reuse the exponential bump, so
|grad phi|^2 / phi stays bounded up to the support edge.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .solver import Trajectory
from .spectral import (
    Field,
    Spectrum,
    inverse_transform,
    transform,
    transition_bump,
    transition_bump_d1,
    transition_bump_d2,
)

# snapshots must resolve the eta_R transition: max gap <= R^2 / KR_MIN_COVERAGE
KR_MIN_COVERAGE = 50

LABEL_GLOBAL = "global-like"
LABEL_GROWING = "growing"
LABEL_BLOWUP = "blowup-detected"
NEAR_CRITICAL_NOTE = "near-critical, inconclusive"


def conjugate_exponent(p: float) -> float:
    if not p > 1:
        raise ValueError(f"p must be > 1, got {p}")
    return p / (p - 1.0)


def phi_profile(r):
    """Spatial cutoff: 1 on [0, 1/2], bump transition, 0 on [1, inf)."""
    return transition_bump((np.asarray(r, dtype=float) - 0.5) * 2.0)


def phi_profile_d1(r):
    return 2.0 * transition_bump_d1((np.asarray(r, dtype=float) - 0.5) * 2.0)


def phi_profile_d2(r):
    return 4.0 * transition_bump_d2((np.asarray(r, dtype=float) - 0.5) * 2.0)


def eta_profile(t):
    """Temporal cutoff: 1 on [0, 1/4], bump transition, 0 on [1, inf)."""
    return transition_bump((np.asarray(t, dtype=float) - 0.25) * (4.0 / 3.0))


def eta_profile_d1(t):
    return (4.0 / 3.0) * transition_bump_d1((np.asarray(t, dtype=float) - 0.25) * (4.0 / 3.0))


def eta_profile_d2(t):
    return (16.0 / 9.0) * transition_bump_d2((np.asarray(t, dtype=float) - 0.25) * (4.0 / 3.0))


def _check_radius(R: float) -> float:
    if not R > 0:
        raise ValueError(f"R must be > 0, got {R}")
    return float(R)


def phi_R(r, R: float):
    """Rescaled spatial cutoff phi(|x|/R) evaluated at radii r."""
    R = _check_radius(R)
    return phi_profile(np.asarray(r, dtype=float) / R)


def eta_R(t, R: float):
    """Rescaled temporal cutoff eta(t/R^2) evaluated at times t."""
    R = _check_radius(R)
    return eta_profile(np.asarray(t, dtype=float) / (R * R))


@dataclass(frozen=True)
class DerivativeBounds:
    """Sampled maxima of the rescaled cutoff derivatives (the empirical C's).

    Each entry is scale-free: multiplying by the appropriate power of R
    removes the R dependence exactly, so reports at different R agree.
    """

    dphi: float  # max |phi_R'| * R
    d2phi: float  # max |phi_R''| * R^2
    grad_sq_over_phi: float  # max (|phi_R'|^2 / phi_R) * R^2
    deta: float  # max |eta_R'| * R^2
    d2eta: float  # max |eta_R''| * R^4
    laplace_ratio: float  # max |Laplacian(phi_R^p')| * R^2 / phi_R^(p'-1)

    def as_dict(self) -> dict[str, float]:
        return {
            "dphi": self.dphi,
            "d2phi": self.d2phi,
            "grad_sq_over_phi": self.grad_sq_over_phi,
            "deta": self.deta,
            "d2eta": self.d2eta,
            "laplace_ratio": self.laplace_ratio,
        }


def derivative_bound_report(R: float, p: float = 2.0, n: int = 1) -> DerivativeBounds:
    """Sample the rescaled derivative bounds of phi_R, eta_R on a fine grid.

    Includes radii approaching the support edge (1 - 2^-j up to j = 40) to
    exercise the |Laplacian phi_R^p'| / phi_R^(p'-1) ratio where the cutoff
    degenerates.
    """
    R = _check_radius(R)
    pp = conjugate_exponent(p)
    sigma = np.concatenate(
        [np.linspace(0.0, 0.999, 4001), 1.0 - 2.0 ** (-np.arange(1, 41, dtype=float))]
    )
    sigma = np.unique(sigma)
    r = sigma * R

    d1 = phi_profile_d1(r / R) / R
    d2 = phi_profile_d2(r / R) / (R * R)
    phi = phi_profile(r / R)
    with np.errstate(divide="ignore", invalid="ignore"):
        grad_sq = np.where(phi > 0, d1 * d1 / np.where(phi > 0, phi, 1.0), 0.0)
    # radial Laplacian of phi_R in n dimensions: phi'' + (n-1)/r phi'
    with np.errstate(divide="ignore", invalid="ignore"):
        lap = d2 + np.where(r > 0, (n - 1) / np.where(r > 0, r, 1.0) * d1, 0.0)
    # |Laplacian(phi^p')| / phi^(p'-1) <= p'|Laplacian phi| + p'(p'-1)|grad phi|^2/phi
    lap_ratio = pp * np.abs(lap) + pp * (pp - 1.0) * grad_sq

    tau = sigma  # same unit grid for the temporal profile
    e1 = eta_profile_d1(tau) / (R * R)
    e2 = eta_profile_d2(tau) / (R * R) ** 2

    return DerivativeBounds(
        dphi=float(np.max(np.abs(d1)) * R),
        d2phi=float(np.max(np.abs(d2)) * R * R),
        grad_sq_over_phi=float(np.max(grad_sq) * R * R),
        deta=float(np.max(np.abs(e1)) * R * R),
        d2eta=float(np.max(np.abs(e2)) * R**4),
        laplace_ratio=float(np.max(lap_ratio) * R * R),
    )


def _snapshot_series(traj: Trajectory, R: float) -> tuple[np.ndarray, list[Field]]:
    R = _check_radius(R)
    if not traj.fields:
        raise ValueError("trajectory carries no field snapshots")
    grid = traj.fields[0][1].grid
    if grid.half_width < R:
        raise ValueError(f"box half-width {grid.half_width:g} does not contain B_R, R = {R:g}")
    horizon = R * R
    pairs = [(t, f) for t, f in traj.fields if t <= horizon * (1.0 + 1e-12)]
    times = np.array([t for t, _ in pairs])
    if times.size < 2 or times[0] > 1e-12 * horizon:
        raise ValueError("snapshots must start at t = 0")
    max_gap = float(np.max(np.diff(times)))
    cadence = horizon / KR_MIN_COVERAGE
    if max_gap > cadence * (1.0 + 1e-9):
        raise ValueError(
            f"snapshot gap {max_gap:g} exceeds required cadence {cadence:g} for R = {R:g}"
        )
    if times[-1] < horizon - cadence * (1.0 + 1e-9):
        raise ValueError(f"snapshots end at t = {times[-1]:g}, need coverage up to R^2 = {horizon:g}")
    return times, [f for _, f in pairs]


def kr_functional(traj: Trajectory, R: float, p: float) -> float:
    """Space-time quadrature of |u|^p phi_R^p' eta_R^p' over [0, R^2] x B_R."""
    pp = conjugate_exponent(p)
    times, fields = _snapshot_series(traj, R)
    grid = fields[0].grid
    radius = np.sqrt(grid.radius_squared())
    spatial_weight = phi_R(radius, R) ** pp
    s_of_t = np.array(
        [float(np.sum(np.abs(f.values) ** p * spatial_weight) * grid.cell_volume) for f in fields]
    )
    eta_weight = eta_R(times, R) ** pp
    return float(np.trapezoid(s_of_t * eta_weight, times))


def annulus_integral(traj: Trajectory, R: float, p: float) -> float:
    """Unweighted integral of |u|^p over [0, R^2] x (B_R minus B_(R/2))."""
    if not p > 1:
        raise ValueError(f"p must be > 1, got {p}")
    times, fields = _snapshot_series(traj, R)
    grid = fields[0].grid
    radius = np.sqrt(grid.radius_squared())
    mask = (radius >= R / 2.0) & (radius <= R)
    s_of_t = np.array(
        [float(np.sum(np.abs(f.values[mask]) ** p) * grid.cell_volume) for f in fields]
    )
    return float(np.trapezoid(s_of_t, times))


def viscoelastic_term(u0: Field, R: float, p: float = 2.0) -> float:
    """integral (-Laplacian u0) phi_R^p' dx, Laplacian taken spectrally."""
    R = _check_radius(R)
    pp = conjugate_exponent(p)
    spec = transform(u0)
    neg_lap = inverse_transform(Spectrum(u0.grid, spec.coef * u0.grid.s))
    weight = phi_R(np.sqrt(u0.grid.radius_squared()), R) ** pp
    return float(np.sum(neg_lap.values * weight) * u0.grid.cell_volume)


@dataclass(frozen=True)
class ClassifyThresholds:
    growth_factor: float = 100.0  # sup-norm multiple of the initial sup
    mass_growth: float = 0.5  # relative mass increase over the last half


@dataclass(frozen=True)
class Classification:
    label: str
    annotation: str
    sup_ratio: float
    mass_growth: float


def classify(traj: Trajectory, thresholds: ClassifyThresholds | None = None) -> Classification:
    """Heuristic global-vs-growing classification of a finished run.

    Blow-up flags win; otherwise the run is 'growing' when the sup norm
    exceeds growth_factor times its initial value or the mass increases
    monotonically by more than mass_growth over the last half.  Runs at the
    critical power are annotated inconclusive: slow growth and boundedness
    are indistinguishable at desk scale.
    """
    th = thresholds or ClassifyThresholds()
    p = traj.meta.get("p")
    n = traj.meta.get("n")
    annotation = ""
    if p is not None and n is not None and abs(p - (1.0 + 2.0 / n)) <= 1e-9:
        annotation = NEAR_CRITICAL_NOTE

    sup = traj.observable("sup")
    sup_ratio = float(np.max(sup) / sup[0]) if sup.size and sup[0] > 0 else 0.0

    mass_series = traj.observable("mass")
    times = traj.times
    growth = 0.0
    monotone = False
    if times.size >= 2:
        sel = times >= times[-1] / 2.0
        m = mass_series[sel]
        if m.size >= 2 and abs(m[0]) > 0:
            scale = float(np.max(np.abs(m)))
            monotone = bool(np.all(np.diff(m) >= -1e-12 * scale))
            growth = float((m[-1] - m[0]) / abs(m[0]))

    if traj.blown_up:
        label = LABEL_BLOWUP
    elif sup_ratio >= th.growth_factor or (monotone and growth > th.mass_growth):
        label = LABEL_GROWING
    else:
        label = LABEL_GLOBAL
    return Classification(label, annotation, sup_ratio, growth)
