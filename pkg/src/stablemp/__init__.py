"""Numerical toolkit for symmetric 2s-stable operators and their maximum principle."""

from __future__ import annotations

from .errors import StableMPError
from .functions import SampledFunction, bump, constant, counterexample, power_profile
from .geometry import Ball, ConvexPolygon, Exhaustion, Interval, Mollifier
from .operator import StableOperator, apply_pointwise, apply_truncated, energy, pairing
from .quadrature import QuadratureConfig
from .solver import Mesh1D, assemble, boundary_decay_fit, solve_dirichlet
from .spectral import LevyMeasure, SpectralMeasure, TailWeight, nondegeneracy_constant, tail_norm
from .verifier import VerifierConfig, classical_mp_check, pipeline_replay, verify_max_principle

__all__ = [
    "Ball",
    "ConvexPolygon",
    "Exhaustion",
    "Interval",
    "LevyMeasure",
    "Mesh1D",
    "Mollifier",
    "QuadratureConfig",
    "SampledFunction",
    "SpectralMeasure",
    "StableMPError",
    "StableOperator",
    "TailWeight",
    "VerifierConfig",
    "apply_pointwise",
    "apply_truncated",
    "assemble",
    "boundary_decay_fit",
    "bump",
    "classical_mp_check",
    "constant",
    "counterexample",
    "energy",
    "nondegeneracy_constant",
    "pairing",
    "pipeline_replay",
    "power_profile",
    "solve_dirichlet",
    "tail_norm",
    "verify_max_principle",
]

__version__ = "0.1.0"
