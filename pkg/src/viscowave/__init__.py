"""Pseudospectral toolkit for the semilinear wave equation with frictional
and viscoelastic damping on periodic boxes."""

__version__ = "0.1.0"

from .analysis import (
    DecayFit,
    MassEstimate,
    accumulate_mass,
    band_decay_report,
    decay_fit,
    profile_error,
    xnorm,
)
from .blowup import classify, derivative_bound_report, kr_functional, viscoelastic_term
from .config import DataComponent, ExperimentConfig, config_from_file, config_from_text
from .experiments import run_experiment
from .propagators import (
    CharacteristicRoots,
    PropagatorMatrix,
    State,
    apply_linear,
    gauss_field,
    gauss_point,
    gauss_spectrum,
    heat_multiplier,
    propagator,
    roots,
)
from .solver import BlowupDetected, Nonlinearity, Trajectory, TruncationError, evaluate_f, run, step
from .spectral import (
    Field,
    SpectralGrid,
    Spectrum,
    band_filter,
    fractional_derivative,
    inverse_transform,
    make_grid,
    norms,
    transform,
)

__all__ = [name for name in dir() if not name.startswith("_")]
