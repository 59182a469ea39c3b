"""The nonlinearity measure ``N^p(y) = inf_z {H_p(y, z) - H_p(z, y)}``."""

from __future__ import annotations

import numpy as np

from ..functions import FunctionSpec
from ..geometry import Manifold
from ..horoball import Ray, busemann, make_ray
from ..search import SearchBudget, maximize_cylinder

__all__ = ["nonlinearity", "nonlinearity_objective", "nonlinearity_bound"]


def nonlinearity_objective(space: Manifold, p, y):
    """``(W, s) -> H_p(z, y) - H_p(y, z)`` at ``z = exp_p(s W)``.

    ``H_p(y, z) = d(y, p) B^p_u(z)`` with ``u = -log_p(y) / d(y, p)`` is
    evaluated along the geodesics through the stable ``along`` forms;
    ``H_p(z, y) = s B^p_{-W}(y)``.
    """
    dy = float(space.dist(p, y))
    u_ray = make_ray(space, p, -space.log(p, y))
    b_u = FunctionSpec.busemann_of(u_ray)

    def obj(W, s):
        back = busemann(Ray(space, p, -W), y)  # (S,)
        fwd = b_u.along(p, W, s)  # (S, M)
        return s[None, :] * back[:, None] - dy * fwd

    return obj


def nonlinearity(space: Manifold, p, y, budget: SearchBudget | None = None, *,
                 seed: int = 0) -> float:
    """``N^p(y)``, always ``<= 0`` (``z = p`` contributes 0).

    The infimum runs over ``z = exp_p(s w)``, ``s in [0, t_max]``, by the
    cylinder search. In Euclidean space the objective cancels exactly, so
    the result is zero up to rounding.
    """
    budget = budget or SearchBudget()
    p = space.check_point(p)
    y = space.check_point(y)
    if float(space.dist(p, y)) < 1e-12:
        return 0.0
    res = maximize_cylinder(nonlinearity_objective(space, p, y), space, p, budget, seed=seed)
    return -max(res.value, 0.0)


def nonlinearity_bound(space: Manifold, p, radius: float, n: int = 16,
                       budget: SearchBudget | None = None, seed: int = 0) -> float:
    """``min`` of ``N^p`` over seeded points with ``d(y, p) <= radius``.

    Points are drawn on the sphere of the given radius and at half of it;
    the minimum is a numerical estimate of the lower bound ``C(R)``.
    """
    rng = np.random.default_rng(seed)
    best = 0.0
    for r in (0.5 * radius, radius):
        dirs = space.random_unit_tangent(p, rng, n)
        ys = space.exp(np.broadcast_to(p, dirs.shape), r * dirs)
        for y in ys:
            best = min(best, nonlinearity(space, p, y, budget, seed=seed))
    return best
