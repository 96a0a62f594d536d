"""Simulation toolkit for the biased linear+nonlinear quantum Rabi model.

Ground states by exact diagonalization in a truncated Fock basis, quantum
Fisher information (exact, small-Omega analytic, and finite-Omega variational),
transition locators, phase diagrams, preparation-time integrals, and
spin-resolved Wigner functions.
"""

__version__ = "0.1.0"

from .model import (CollapseBoundError, DerivedScales, ModelParams,
                    NoTransitionError, derived_scales, effective_potential,
                    low_freq_boundary, transition_bias, transition_g1)

__all__ = [
    "__version__",
    "CollapseBoundError", "DerivedScales", "ModelParams", "NoTransitionError",
    "derived_scales", "effective_potential", "low_freq_boundary",
    "transition_bias", "transition_g1",
]
