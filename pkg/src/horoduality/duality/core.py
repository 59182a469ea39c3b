"""Extended reals, the 1D Legendre transform and the Busemann conjugate."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..functions import FunctionSpec, HSpec
from ..geometry import Manifold
from ..horoball import Ray, busemann, h_kernel
from ..search import CylinderResult, SearchBudget, golden_section, maximize_cylinder

__all__ = [
    "ExtScalar",
    "ConjugateWitness",
    "WitnessError",
    "legendre_1d",
    "conjugate",
    "conjugate_objective",
    "radial_conjugate",
]

FINITE = "finite"
DIVERGING = "diverging"
PLUS_INF = "plus_infinity"
MINUS_INF = "minus_infinity"


@dataclass(frozen=True)
class ExtScalar:
    """Value in ``R u {+inf, -inf}``, or a truncated value still growing.

    ``radius`` is the truncation radius the value refers to; for a diverging
    value it is the radius at which growth was detected. ``growth`` is the
    increase of the truncated sup from ``t_max`` to ``2 t_max`` when the
    divergence probe ran.
    """

    value: float
    status: str = FINITE
    radius: float | None = None
    growth: float | None = None

    def __post_init__(self):
        if self.status not in (FINITE, DIVERGING, PLUS_INF, MINUS_INF):
            raise ValueError(f"unknown status {self.status!r}")

    @classmethod
    def finite(cls, value, radius=None, growth=None):
        return cls(float(value), FINITE, radius, growth)

    @classmethod
    def diverging(cls, last_value, last_radius, growth=None):
        return cls(float(last_value), DIVERGING, float(last_radius), growth)

    @classmethod
    def plus_infinity(cls):
        return cls(math.inf, PLUS_INF)

    @classmethod
    def minus_infinity(cls):
        return cls(-math.inf, MINUS_INF)

    @property
    def is_finite(self) -> bool:
        return self.status == FINITE

    @property
    def is_diverging(self) -> bool:
        return self.status == DIVERGING

    @property
    def is_plus_infinity(self) -> bool:
        return self.status == PLUS_INF

    def as_float(self, diverging_as_inf: bool = False) -> float:
        """Plain float; a diverging value is its truncated estimate unless
        ``diverging_as_inf``."""
        if self.status == DIVERGING and diverging_as_inf:
            return math.inf
        return self.value

    def __float__(self):
        return float(self.value)


@dataclass(frozen=True)
class ConjugateWitness:
    """Maximizing pair ``(t, v)`` of a conjugate sup and its value."""

    t: float
    v: np.ndarray
    value: float


class WitnessError(AssertionError):
    """A returned witness does not reproduce its value."""


def legendre_1d(h: HSpec, s: float, budget: SearchBudget | None = None) -> ExtScalar:
    """``h*(s) = sup_{t >= 0} (s t - h(t))``.

    Closed forms for quadratic, power and linear profiles; otherwise
    golden-section on ``[0, t_max]`` with the same search on ``[0, 2 t_max]``
    as divergence probe.
    """
    budget = budget or SearchBudget()
    s = float(s)
    if not s >= 0.0:
        raise ValueError(f"legendre_1d needs s >= 0, got {s}")
    if h.has_closed_conjugate:
        val = float(h.closed_conjugate(s))
        return ExtScalar.plus_infinity() if math.isinf(val) else ExtScalar.finite(val)

    tol = min(budget.tol, 1e-9)

    def neg(t):
        with np.errstate(over="ignore"):
            return -(s * t - float(h(t)))

    def sup_on(T):
        # the objective is concave; also compare the endpoints exactly
        _, m = golden_section(neg, 0.0, T, tol)
        return max(-m, -neg(0.0), -neg(T))

    v1 = sup_on(budget.t_max)
    v2 = max(sup_on(2.0 * budget.t_max), v1)
    if v2 - v1 > budget.divergence_slack:
        return ExtScalar.diverging(v2, 2.0 * budget.t_max)
    return ExtScalar.finite(v1, budget.t_max)


def radial_conjugate(h: HSpec, p, x, space: Manifold, budget: SearchBudget | None = None) -> ExtScalar:
    """``f*_p(x) = h*(d(x, p))`` for ``f = h(d(., p))``."""
    return legendre_1d(h, float(space.dist(x, p)), budget)


def conjugate_objective(f: FunctionSpec, p, x):
    """``(V, t) -> t B^p_V(x) - f(exp_p(-t V))`` on ``(S,) x (M,)`` grids."""
    space = f.space

    def obj(V, t):
        b = busemann(Ray(space, p, V), x)
        with np.errstate(over="ignore", invalid="ignore"):
            fv = f.along(p, -V, t)
            out = t[None, :] * b[:, None] - fv
        # +inf values of f exclude the cell
        return np.where(np.isposinf(fv), -np.inf, out)

    return obj


def _check_witness(f, p, x, res: CylinderResult, obj, tol_kernel=1e-8, tol_value=1e-9):
    """Witness must reproduce its value from ``(t, v)`` and satisfy
    ``value = H_p(z, x) - f(z)`` at ``z = exp_p(-t v)``."""
    space = f.space
    t, v = res.t, res.v
    again = float(obj(v[None], np.array([t]))[0, 0])
    if abs(again - res.value) > tol_value * max(1.0, abs(res.value)):
        raise WitnessError(f"witness value {again!r} != reported {res.value!r}")
    z = space.exp(p, -t * v)
    kern = float(h_kernel(space, p, z, x))
    fz_along = float(f.along(p, -v[None], np.array([t]))[0, 0])
    lhs = kern - fz_along
    scale = max(1.0, abs(kern), abs(fz_along))
    if abs(lhs - res.value) > tol_kernel * scale:
        raise WitnessError(
            f"kernel identity fails at the witness: H_p(z,x) - f(z) = {lhs!r}, value {res.value!r}")


def conjugate(f: FunctionSpec, p, x, budget: SearchBudget | None = None, *,
              seed: int = 0, probe: bool = True, check: bool = True):
    """Busemann conjugate ``f*_p(x)``, truncated to ``t <= budget.t_max``.

    Returns ``(ExtScalar, ConjugateWitness | None)``. With ``probe`` the
    search is repeated on ``[0, 2 t_max]``; growth beyond
    ``budget.divergence_slack`` marks the value as diverging (and the
    returned estimate and witness are those of the larger radius).
    """
    budget = budget or SearchBudget()
    space = f.space
    p = space.check_point(p)
    x = space.check_point(x)
    obj = conjugate_objective(f, p, x)
    r1 = maximize_cylinder(obj, space, p, budget, seed=seed)
    if r1.is_minus_infinity:
        return ExtScalar.minus_infinity(), None
    if check:
        _check_witness(f, p, x, r1, obj)
    if not probe:
        return ExtScalar.finite(r1.value, budget.t_max), ConjugateWitness(r1.t, r1.v, r1.value)
    big = budget.doubled()
    r2 = maximize_cylinder(obj, space, p, big, seed=seed)
    growth = r2.value - r1.value
    if growth > budget.divergence_slack:
        if check:
            _check_witness(f, p, x, r2, obj)
        return (ExtScalar.diverging(r2.value, big.t_max, growth),
                ConjugateWitness(r2.t, r2.v, r2.value))
    return (ExtScalar.finite(r1.value, budget.t_max, growth),
            ConjugateWitness(r1.t, r1.v, r1.value))
