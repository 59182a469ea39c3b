"""Busemann conjugates, biconjugates, the nonlinearity measure and audits."""

from .audit import fenchel_young_audit
from .biconjugate import BiconjugateResult, BiconjugateSolver, biconjugate
from .core import (ConjugateWitness, ExtScalar, WitnessError, conjugate, conjugate_objective,
                   legendre_1d, radial_conjugate)
from .nonlinearity import nonlinearity, nonlinearity_bound, nonlinearity_objective

__all__ = [
    "ExtScalar", "ConjugateWitness", "WitnessError", "legendre_1d", "conjugate",
    "conjugate_objective", "radial_conjugate",
    "BiconjugateSolver", "BiconjugateResult", "biconjugate",
    "nonlinearity", "nonlinearity_objective", "nonlinearity_bound",
    "fenchel_young_audit",
]
