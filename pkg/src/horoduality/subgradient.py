"""The Busemann subdifferential: witness points, membership tests and transport.

A tangent ``v`` at ``x`` is a subgradient of ``f`` when, with the witness
point ``y = exp_p(-|v| eta)`` built from the asymptote ``eta`` at ``p`` of the
ray from ``x`` in direction ``-v``,

    f(z) >= f(x) + H_p(z, y) - H_p(x, y)    for all z.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .duality import conjugate, radial_conjugate
from .functions import FunctionSpec, HSpec
from .geometry import Manifold
from .horoball import asymptote, h_kernel, make_ray
from .report import Report
from .search import SearchBudget

__all__ = [
    "SubgradientWitness",
    "witness_point",
    "is_subgradient",
    "radial_subgradient",
    "subgradient_from_equality",
    "transport_subgradient",
]


@dataclass(frozen=True)
class SubgradientWitness:
    """``v`` at ``x``, its asymptotic direction ``eta`` at ``p`` (``None`` when
    ``v = 0``) and the witness point ``y``."""

    x: np.ndarray
    v: np.ndarray
    eta: np.ndarray | None
    y: np.ndarray


def witness_point(space: Manifold, p, x, v) -> SubgradientWitness:
    """``y = exp_p(-|v| eta)`` with ``eta`` asymptotic to the ray ``(x, -v)``;
    ``y = p`` when ``v = 0``."""
    p = space.check_point(p)
    x = space.check_point(x)
    v = space.check_tangent(x, v)
    nv = float(space.norm(x, v))
    if nv == 0.0:
        return SubgradientWitness(x, v, None, p.copy())
    eta = asymptote(p, make_ray(space, x, -v)).dir
    y = space.exp(p, -nv * eta)
    return SubgradientWitness(x, v, eta, y)


def _exact_conjugate(f: FunctionSpec, p, y, budget):
    """Radial functions centred at ``p`` use the exact 1D reduction."""
    space = f.space
    if f.is_radial and float(space.dist(f.center, p)) == 0.0:
        return radial_conjugate(f.h, p, y, space, budget), True
    val, _ = conjugate(f, p, y, budget, probe=False)
    return val, False


def is_subgradient(f: FunctionSpec, p, x, v, budget: SearchBudget | None = None, *,
                   seed: int = 0) -> Report:
    """Sampled membership test for ``v`` in the subdifferential of ``f`` at ``x``.

    (i) ``budget.n_samples`` points ``z`` in the ball of radius
    ``budget.sample_radius`` around ``p``, followed by a simplex polish from
    the worst sample, give the minimal slack
    ``f(z) - f(x) - H_p(z, y) + H_p(x, y)``; it must be ``>= -budget.tol``.
    (ii) The equality residual ``f(x) + f*_p(y) - H_p(x, y)`` must be within
    ``budget.tol``. The conjugate used is exact for radial functions centred
    at ``p`` and a truncated sup otherwise; being a lower bound, a truncated
    sup can only make the residual smaller, so a residual below ``-tol`` is
    a search failure and one above ``+tol`` disproves membership.
    """
    budget = budget or SearchBudget()
    space = f.space
    w = witness_point(space, p, x, v)
    p = space.check_point(p)
    fx = float(f(w.x))
    hxy = float(h_kernel(space, p, w.x, w.y))

    def slack(z):
        return np.asarray(f(z), dtype=float) - fx - h_kernel(space, p, z, w.y) + hxy

    rng = np.random.default_rng(seed)
    zs = space.random_point(rng, budget.n_samples, radius=budget.sample_radius, center=p)
    vals = slack(zs)
    i = int(np.argmin(vals))
    worst, z_worst = float(vals[i]), zs[i]

    # polish in normal coordinates at p
    def g(c):
        z = space.exp(p, space.from_coords(p, c))
        return float(slack(z[None])[0])

    res = minimize(g, space.to_coords(p, space.log(p, z_worst)), method="Nelder-Mead",
                   options=dict(maxiter=budget.refine_iters, xatol=1e-10, fatol=1e-14))
    if res.fun < worst:
        worst, z_worst = float(res.fun), space.exp(p, space.from_coords(p, res.x))

    fstar, exact = _exact_conjugate(f, p, w.y, budget)
    residual = fx + fstar.value - hxy
    inequality_ok = worst >= -budget.tol
    equality_ok = abs(residual) <= budget.tol
    notes = []
    if residual < -budget.tol:
        notes.append("conjugate below the Fenchel-Young bound: search failure")
    if not exact:
        notes.append("equality residual uses a truncated conjugate")
    return Report(
        name=f"subgradient:{f.label}",
        passed=bool(inequality_ok and equality_ok),
        metrics={"min_slack": worst, "equality_residual": residual,
                 "inequality_ok": bool(inequality_ok), "equality_ok": bool(equality_ok),
                 "exact_conjugate": exact},
        witness={"z": z_worst, "y": w.y, "eta": w.eta},
        notes=notes,
    )


def radial_subgradient(h: HSpec, p, x, space: Manifold) -> np.ndarray:
    """``grad f(x) = -(h'(d)/d) log_x(p)`` for ``f = h(d(., p))``; zero at ``p``."""
    p = space.check_point(p)
    x = space.check_point(x)
    d = float(space.dist(x, p))
    if d == 0.0:
        return np.zeros_like(x)
    return -(float(h.derivative(d)) / d) * space.log(x, p)


def subgradient_from_equality(f: FunctionSpec, p, x, y) -> np.ndarray:
    """Subgradient ``d(y, p) u`` at ``x`` recovered from an equality point ``y``.

    ``eta = -log_p(y) / d(y, p)`` and ``u`` is minus the direction at ``x``
    asymptotic to the ray ``(p, eta)``. The caller is responsible for
    ``f(x) + f*_p(y) = H_p(x, y)``.
    """
    space = f.space
    p = space.check_point(p)
    x = space.check_point(x)
    y = space.check_point(y)
    d = float(space.dist(y, p))
    if d < 1e-12:
        raise ValueError("y = p carries no direction; the subgradient is 0 only at minima")
    eta = -space.log(p, y) / d
    u = -asymptote(x, make_ray(space, p, eta)).dir
    return d * u


def transport_subgradient(iso, q, b, u, p=None) -> np.ndarray:
    """``DI_b(u)``: subgradients of ``f o I`` at ``b`` (base ``q``) map to
    subgradients of ``f`` at ``I(b)`` (base ``p = I(q)``)."""
    space = iso.space
    if p is not None:
        gap = float(space.dist(iso.apply(q), space.check_point(p)))
        if gap > 1e-8:
            raise ValueError(f"isometry does not map q to p (gap {gap:.3g})")
    return iso.differential(b, u)
