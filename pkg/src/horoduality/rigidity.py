"""Affinity checks, zero-Ricci directions, the SPD splitting and the Gram probe.

These are consistency checks: an affine function forces a zero-Ricci
direction and an isometric splitting off a line, so the probes look for
(or rule out, numerically) each of these on the catalog spaces.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .functions import FunctionSpec
from .geometry import SPD, Manifold
from .report import Report
from .search import SearchBudget, fd_gradient, maximize_sphere

__all__ = [
    "AffinityReport",
    "affinity_report",
    "second_differences",
    "zero_ricci_direction",
    "splitting_check_spd",
    "gram_probe",
    "gram_second_differences",
    "AFFINE_TOL",
]

AFFINE_TOL = 1e-6
STEP = 0.25
T_GRID = np.arange(-2.0, 2.0 + STEP / 2, STEP)


@dataclass
class AffinityReport:
    max_second_difference: float
    gradient_norm_mean: float
    gradient_norm_stddev: float
    witness_geodesic: tuple  # (base point, unit tangent, t)
    verdict: str  # "affine_within_tol" or "not_affine"

    @property
    def affine(self) -> bool:
        return self.verdict == "affine_within_tol"


def second_differences(fun, space: Manifold, base, dirs, ts=T_GRID, h: float = STEP) -> np.ndarray:
    """``fun(g(t+h)) - 2 fun(g(t)) + fun(g(t-h))`` along ``g(t) = exp_b(t v)``.

    ``base`` and ``dirs`` carry a batch axis of length ``G``; returns
    ``(G, len(ts))``.
    """
    base = np.asarray(base, dtype=float)
    dirs = np.asarray(dirs, dtype=float)
    G = len(dirs)
    offs = np.concatenate([ts - h, ts, ts + h])  # (3T,)
    tv = offs[None, :, None] * dirs.reshape(G, 1, -1)
    tv = tv.reshape((G, len(offs)) + space.point_shape)
    b = np.broadcast_to(base[:, None], tv.shape)
    vals = np.asarray(fun(space.exp(b, tv)), dtype=float).reshape(G, 3, len(ts))
    return vals[:, 2] - 2.0 * vals[:, 1] + vals[:, 0]


def _geodesics(space: Manifold, n: int, seed: int, radius: float = 2.0, center=None):
    rng = np.random.default_rng(seed)
    base = space.random_point(rng, n, radius=radius, center=center)
    dirs = np.stack([space.random_unit_tangent(b, rng) for b in base])
    return base, dirs


def affinity_report(f: FunctionSpec, space: Manifold | None = None, n_geodesics: int = 100,
                    seed: int = 0) -> AffinityReport:
    """Second differences of ``f`` along seeded unit-speed geodesics.

    ``t`` runs over ``-2, ..., 2`` in steps of ``h = 0.25``; gradient norms
    come from central differences at the geodesic midpoints. The verdict is
    affine when the largest second difference is at most ``AFFINE_TOL``.
    """
    space = space or f.space
    base, dirs = _geodesics(space, n_geodesics, seed)
    sd = second_differences(f, space, base, dirs)
    g, ti = np.unravel_index(int(np.argmax(np.abs(sd))), sd.shape)
    worst = float(abs(sd[g, ti]))
    norms = np.array([float(space.norm(b, fd_gradient(f, space, b))) for b in base])
    return AffinityReport(
        max_second_difference=worst,
        gradient_norm_mean=float(norms.mean()),
        gradient_norm_stddev=float(norms.std()),
        witness_geodesic=(base[g], dirs[g], float(T_GRID[ti])),
        verdict="affine_within_tol" if worst <= AFFINE_TOL else "not_affine",
    )


def zero_ricci_direction(space: Manifold, p, budget: SearchBudget | None = None, *,
                         seed: int = 0):
    """``(min |Ric_p(v)|, argmin)`` over unit tangents ``v`` at ``p``.

    Sphere sampling followed by simplex refinement; the argmin is unit.
    """
    if space.dim < 2:
        raise ValueError("Ricci curvature needs dim >= 2")
    budget = budget or SearchBudget()
    p = space.check_point(p)

    def obj(V):
        out = np.empty(len(V))
        for i, v in enumerate(V):
            v = v / space.norm(p, v)
            out[i] = -abs(space.ricci_dir(p, v))
        return out

    value, v = maximize_sphere(obj, space, p, budget, seed=seed)
    v = v / space.norm(p, v)
    return float(abs(space.ricci_dir(p, v))), v


def splitting_check_spd(X, Y) -> float:
    """``|d(X,Y)^2 - d(X~,Y~)^2 - (s_X - s_Y)^2|`` for the split
    ``Z -> (Z / det(Z)^(1/n), ln det(Z) / sqrt(n))``."""
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    n = X.shape[-1]
    space = SPD(n)
    X = space.check_point(X)
    Y = space.check_point(Y)

    def split(Z):
        ld = np.linalg.slogdet(Z)[1]
        return Z / np.exp(ld / n)[..., None, None], ld / np.sqrt(n)

    Xt, sx = split(X)
    Yt, sy = split(Y)
    return np.abs(space.dist(X, Y) ** 2 - space.dist(Xt, Yt) ** 2 - (sx - sy) ** 2)


def gram_second_differences(space: Manifold, z, x, base, dirs) -> np.ndarray:
    """Second differences of ``y -> <log_z x, log_z y>_z`` along geodesics."""
    f = FunctionSpec.gram(z, x, space)
    return second_differences(f, space, base, dirs)


def gram_probe(space: Manifold, z, x, n_geodesics: int = 1000, seed: int = 0,
               radius: float = 2.0) -> Report:
    """Search seeded geodesics for convexity failures of ``g^x_z``.

    The verdict is ``linear`` when every second difference is within 1e-10
    of 0, ``non_convex`` when one is below -1e-3 (the witness is the most
    negative one) and ``inconclusive`` otherwise. ``passed`` means the probe
    reached a conclusive verdict.
    """
    z = space.check_point(z)
    x = space.check_point(x)
    if float(space.dist(z, x)) < 1e-12:
        raise ValueError("gram_probe needs z != x")
    base, dirs = _geodesics(space, n_geodesics, seed, radius=radius, center=z)
    sd = gram_second_differences(space, z, x, base, dirs)
    g, ti = np.unravel_index(int(np.argmin(sd)), sd.shape)
    lo = float(sd[g, ti])
    hi = float(np.max(np.abs(sd)))
    if hi <= 1e-10:
        verdict = "linear"
    elif lo < -1e-3:
        verdict = "non_convex"
    else:
        verdict = "inconclusive"
    return Report(
        name="gram_probe",
        passed=verdict != "inconclusive",
        metrics={"min_second_difference": lo, "max_abs_second_difference": hi,
                 "verdict": verdict, "geodesics": int(n_geodesics)},
        witness={"base": base[g], "dir": dirs[g], "t": float(T_GRID[ti])},
    )
