"""Beating between the Fourier modes +-1 of a cubic NLS with a cos 2x modulated nonlinearity.

Exact normal-form algebra (:mod:`nlsbeat.polynomial`, :mod:`nlsbeat.normal_form`),
Galerkin simulation (:mod:`nlsbeat.dynamics`), observables and fits
(:mod:`nlsbeat.analysis`, :mod:`nlsbeat.fitting`) and an experiment harness
(:mod:`nlsbeat.harness`).
"""
from .analysis import (
    NormalFormTransformer,
    ObservableSeries,
    beating_prediction,
    general_prediction,
    integrate_reduced,
    observable_series,
    observables,
    sup_error,
)
from .dynamics import GalerkinNLS, GalerkinState, SimConfig, Trajectory, initial_state, run
from .fitting import SinusoidRegressor, fit_frequency, scaling_exponent
from .normal_form import (
    ResonantQuadruple,
    build_perturbation,
    classify_Z4,
    enumerate_resonant,
    solve_homological,
)
from .polynomial import ExactComplex, HamPolynomial, monomial, poisson_bracket
from .validation import ConfigurationError

__version__ = "0.1.0"

__all__ = [
    "ConfigurationError",
    "ExactComplex",
    "GalerkinNLS",
    "GalerkinState",
    "HamPolynomial",
    "NormalFormTransformer",
    "ObservableSeries",
    "ResonantQuadruple",
    "SimConfig",
    "SinusoidRegressor",
    "Trajectory",
    "beating_prediction",
    "build_perturbation",
    "classify_Z4",
    "enumerate_resonant",
    "fit_frequency",
    "general_prediction",
    "initial_state",
    "integrate_reduced",
    "monomial",
    "observable_series",
    "observables",
    "poisson_bracket",
    "run",
    "scaling_exponent",
    "solve_homological",
    "sup_error",
]
