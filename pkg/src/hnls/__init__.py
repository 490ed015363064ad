"""Hermite-spectral toolkit for the 2D cubic NLS with a harmonic trap.

The state of the simulator is a triangular array of Hermite coefficients
(`SpectralField`).  Everything else -- transforms, spectral operators,
time stepping, energy bookkeeping and the estimate-verification harness --
is built on top of that representation.
"""

from hnls.hermite import (
    QuadratureRule,
    BasisTable,
    SpectralField,
    PhysicalField,
    gauss_hermite_rule,
    eval_basis,
    to_physical,
    to_spectral,
)

__all__ = [
    "QuadratureRule",
    "BasisTable",
    "SpectralField",
    "PhysicalField",
    "gauss_hermite_rule",
    "eval_basis",
    "to_physical",
    "to_spectral",
]

__version__ = "0.1.0"
