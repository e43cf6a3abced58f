"""Numerics for the anisotropic fourth-order nonlinear Schrodinger equation.

The linear flow, its stationary-phase asymptotics, an independent
oscillatory-integral oracle, a split-step solver for the nonlinear
equation, and two constructions of the solution of the final-state
problem, plus the experiment driver that ties them together.
"""

from .dispersion import Form, ModelParams, free_solution, propagate
from .final_state import (
    DecayPrediction,
    FinalStateConfig,
    backward_construct,
    decay_prediction,
    picard_iterate,
    scattering_defect,
)
from .grid import Field, Grid, SpectralField, forward_dft, inverse_dft, lp_norm
from .metrics import AdmissiblePair, DecayFit, fit_power_law, strichartz_quotient
from .profiles import Gaussian, HermiteGaussian, default_profile
from .solver import Scheme, SolveConfig, TailGuardError, solve

__version__ = "0.1.0"

__all__ = [
    "AdmissiblePair",
    "DecayFit",
    "DecayPrediction",
    "Field",
    "FinalStateConfig",
    "Form",
    "Gaussian",
    "Grid",
    "HermiteGaussian",
    "ModelParams",
    "Scheme",
    "SolveConfig",
    "SpectralField",
    "TailGuardError",
    "backward_construct",
    "decay_prediction",
    "default_profile",
    "fit_power_law",
    "forward_dft",
    "free_solution",
    "inverse_dft",
    "lp_norm",
    "picard_iterate",
    "propagate",
    "scattering_defect",
    "solve",
    "strichartz_quotient",
]
