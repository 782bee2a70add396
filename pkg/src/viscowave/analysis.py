"""Quantitative verification: rate fits, profile errors, mass accounting.

Only exponents are falsifiable at desk scale; the multiplicative constants
of the decay estimates are reported, never asserted.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .propagators import State, apply_linear
from .solver import Trajectory, dk_key
from .spectral import Field, Spectrum, band_filter, l2_norm, transform

FIT_MIN_SAMPLES = 10


@dataclass(frozen=True)
class DecayFit:
    """Least-squares slope of log(value) against the fit abscissa."""

    slope: float
    intercept: float
    stderr: float
    t_min: float
    t_max: float
    n_samples: int


def _least_squares_line(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    a = np.vstack([x, np.ones_like(x)]).T
    (slope, intercept), res, *_ = np.linalg.lstsq(a, y, rcond=None)
    dof = len(x) - 2
    if dof > 0 and res.size:
        sigma2 = float(res[0]) / dof
        sxx = float(np.sum((x - x.mean()) ** 2))
        stderr = float(np.sqrt(sigma2 / sxx))
    else:
        stderr = 0.0
    return float(slope), float(intercept), stderr


def _fit(times, values, window, log_abscissa: bool) -> DecayFit:
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    t_min, t_max = window
    if not t_min < t_max:
        raise ValueError(f"bad fit window {window}")
    sel = (times >= t_min) & (times <= t_max)
    t, v = times[sel], values[sel]
    if len(t) < FIT_MIN_SAMPLES:
        raise ValueError(f"fit window holds {len(t)} samples, need >= {FIT_MIN_SAMPLES}")
    if np.any(v <= 0) or not np.all(np.isfinite(v)):
        raise ValueError("fit requires positive finite values on the window")
    x = np.log1p(t) if log_abscissa else t
    slope, intercept, stderr = _least_squares_line(x, np.log(v))
    return DecayFit(slope, intercept, stderr, float(t_min), float(t_max), len(t))


def decay_fit(times, values, window) -> DecayFit:
    """Slope of log(value) vs log(1+t) on [t_min, t_max]."""
    return _fit(times, values, window, log_abscissa=True)


def exponential_fit(times, values, window) -> DecayFit:
    """Slope of log(value) vs t, for exponentially decaying quantities."""
    return _fit(times, values, window, log_abscissa=False)


def default_window(t_final: float) -> tuple[float, float]:
    """Second half of the run; early transients pollute the asymptotics."""
    return (t_final / 2.0, t_final)


def profile_error(state: State, big_m: float, k: float = 0.0) -> float:
    """Normalized distance to the mass-scaled heat kernel.

    Returns t^(n/4 + k/2) ||grad^k (u(t) - M G_t)||_2, evaluated entirely on
    the frequency lattice against the exact kernel spectrum c_n e^(-t|xi|^2).
    """
    t = state.time
    if t <= 0:
        raise ValueError("profile error needs t > 0")
    g = state.grid
    n = g.dim
    diff = state.u_hat.coef - big_m * (g.cn * np.exp(-t * g.s))
    weight = np.abs(diff) ** 2
    if k != 0:
        weight = weight * g.s**k
    err = np.sqrt(np.sum(weight) * g.freq_cell_volume)
    return float(t ** (n / 4.0 + k / 2.0) * err)


@dataclass(frozen=True)
class MassEstimate:
    """Decomposition of the profile mass: data integral plus source integral."""

    linear_part: float
    nonlinear_part: float
    tail: float
    total: float


def accumulate_mass(traj: Trajectory, p: float, n: int) -> MassEstimate:
    """Integrate the recorded source mass over [0, T] and extrapolate the tail.

    The tail fits a power law to the last stretch [T/3, T] of the source-mass
    series and integrates it over [T, inf); the fitted exponent must be < -1
    (guaranteed asymptotically when p exceeds the critical power 1 + 2/n).
    """
    if not p > 1 + 2.0 / n:
        raise ValueError(f"mass accumulation needs supercritical p > {1 + 2 / n:g}, got {p}")
    if traj.blown_up:
        raise ValueError("trajectory is blow-up flagged; mass is undefined")
    times = traj.times
    fmass = traj.observable("f_mass")
    linear_part = traj.p0 + traj.p1
    finite_part = float(np.trapezoid(fmass, times))

    t_final = times[-1]
    sel = times >= t_final / 3.0
    window_vals = fmass[sel]
    scale = float(np.max(np.abs(fmass))) if fmass.size else 0.0
    tail = 0.0
    if scale > 0 and np.all(np.abs(window_vals) > 1e-13 * scale):
        sign = 1.0 if window_vals[0] > 0 else -1.0
        if np.all(sign * window_vals > 0):
            fit = decay_fit(times, sign * fmass, (t_final / 3.0, t_final))
            if fit.slope >= -1.0:
                raise ValueError(
                    f"fitted source-mass exponent {fit.slope:.3f} >= -1: tail not integrable"
                )
            amplitude = np.exp(fit.intercept)
            tail = sign * amplitude * (1.0 + t_final) ** (fit.slope + 1.0) / (-fit.slope - 1.0)
    nonlinear_part = finite_part + tail
    return MassEstimate(linear_part, nonlinear_part, tail, linear_part + nonlinear_part)


def xnorm(traj: Trajectory, n: int, k0: float, t_max: float | None = None) -> float:
    """sup_t [(1+t)^(n/4) ||u||_2 + (1+t)^(n/4 + k0/2) ||grad^k0 u||_2] over samples."""
    l2 = traj.observable("l2")
    dk = traj.observable(dk_key(k0))
    times = traj.times
    if t_max is not None:
        sel = times <= t_max
        times, l2, dk = times[sel], l2[sel], dk[sel]
    if times.size == 0:
        raise ValueError("no samples in the requested window")
    w = (1.0 + times) ** (n / 4.0)
    return float(np.max(w * l2 + w * (1.0 + times) ** (k0 / 2.0) * dk))


@dataclass(frozen=True)
class OracleReport:
    """Quadrature check of a decay inequality: LHS, claimed bound, their ratio."""

    label: str
    times: np.ndarray
    lhs: np.ndarray
    bound: np.ndarray

    @property
    def ratio(self) -> np.ndarray:
        return self.lhs / self.bound

    @property
    def spread(self) -> float:
        r = self.ratio
        return float(np.max(r) / np.min(r))


def gaussian_moment_norm(k: float, r: float, n: int, t: float) -> float:
    """|| |xi|^k e^(-(1+t)|xi|^2) ||_r by radial quadrature."""
    if k < 0:
        raise ValueError("k must be >= 0")
    if not 1 <= r <= 2:
        raise ValueError(f"r must lie in [1, 2], got {r}")
    if n not in (1, 2):
        raise ValueError("n must be 1 or 2")
    surface = 2.0 if n == 1 else 2.0 * np.pi
    a = (1.0 + t) * r

    def integrand(tau):
        return tau ** (k * r + n - 1) * np.exp(-a * tau * tau)

    val, _ = integrate.quad(integrand, 0.0, np.inf)
    return float((surface * val) ** (1.0 / r))


def gaussian_moment_report(k: float, r: float, n: int, times) -> OracleReport:
    """Ratio of the Gaussian-moment norm to (1+t)^(-n/(2r) - k/2)."""
    times = np.asarray(times, dtype=float)
    lhs = np.array([gaussian_moment_norm(k, r, n, t) for t in times])
    bound = (1.0 + times) ** (-n / (2.0 * r) - k / 2.0)
    return OracleReport(f"gaussian-moment k={k:g} r={r:g} n={n}", times, lhs, bound)


def convolution_decay_report(a: float, b: float, times) -> OracleReport:
    """integral_0^t (1+t-s)^(-a) (1+s)^(-b) ds against (1+t)^(-min(a,b))."""
    if not (a > 0 and b > 0):
        raise ValueError("a and b must be positive")
    if max(a, b) <= 1:
        raise ValueError(f"need max(a, b) > 1, got a={a}, b={b}")
    times = np.asarray(times, dtype=float)

    def lhs_at(t):
        def integrand(s):
            return (1.0 + t - s) ** (-a) * (1.0 + s) ** (-b)

        val, _ = integrate.quad(integrand, 0.0, t, points=[t / 2.0], limit=200)
        return val

    lhs = np.array([lhs_at(t) for t in times])
    bound = (1.0 + times) ** (-min(a, b))
    return OracleReport(f"convolution a={a:g} b={b:g}", times, lhs, bound)


def smoothed_convolution_report(a: float, b: float, c: float, times) -> OracleReport:
    """integral_0^t e^(-c(t-s)) (t-s)^(-a) (1+s)^(-b) ds against (1+t)^(-b)."""
    if not (0 <= a < 1 and b > 0 and c > 0):
        raise ValueError(f"need 0 <= a < 1, b > 0, c > 0; got a={a}, b={b}, c={c}")
    times = np.asarray(times, dtype=float)

    def lhs_at(t):
        # substitute sigma = t - s; the endpoint singularity sigma^(-a) is
        # handled by quad's algebraic weight
        def integrand(sigma):
            return np.exp(-c * sigma) * (1.0 + t - sigma) ** (-b)

        if a == 0:
            val, _ = integrate.quad(integrand, 0.0, t, limit=200)
        else:
            val, _ = integrate.quad(
                integrand, 0.0, t, weight="alg", wvar=(-a, 0.0), limit=200
            )
        return val

    lhs = np.array([lhs_at(t) for t in times])
    bound = (1.0 + times) ** (-b)
    return OracleReport(f"smoothed-convolution a={a:g} b={b:g} c={c:g}", times, lhs, bound)


def band_decay_report(data: Field, band: str, k: float, t_final: float, samples: int = 60) -> DecayFit:
    """Evolve band-filtered data linearly and fit its decay.

    The low band is fitted in log-log coordinates against (1+t); the middle
    and high bands decay exponentially and are fitted log-linearly.
    """
    spec = transform(data)
    filtered = band_filter(spec, band)
    if l2_norm(filtered) < 1e-14 * max(l2_norm(spec), 1e-300):
        raise ValueError(f"data has no content in the {band!r} band")
    g = data.grid
    zero = Spectrum(g, np.zeros(g.shape, dtype=complex))
    state0 = State(0.0, filtered, zero)
    times = np.linspace(0.0, t_final, samples + 1)
    values = np.array([l2_norm(apply_linear(state0, t).u_hat, k) for t in times])
    window = default_window(t_final)
    if band == "low":
        return decay_fit(times, values, window)
    return exponential_fit(times, values, window)
