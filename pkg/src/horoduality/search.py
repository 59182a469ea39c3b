"""Derivative-free search utilities.

``maximize_cylinder`` is the workhorse behind conjugates, the nonlinearity
measure and the zero-Ricci search: it maximizes an objective over
``(unit tangent v at p) x (t in [0, t_max])`` by a coarse grid followed by
Nelder-Mead refinement in a gnomonic chart around the best cells.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import minimize

from .geometry import Manifold

__all__ = [
    "SearchBudget",
    "CylinderResult",
    "golden_section",
    "sphere_coefficients",
    "maximize_cylinder",
    "refine_cylinder",
    "maximize_sphere",
    "fd_gradient",
]


@dataclass(frozen=True)
class SearchBudget:
    """Truncation radii, grid sizes and tolerances shared by all searches."""

    t_max: float = 12.0
    sphere_samples: int = 96
    t_samples: int = 64
    refine_iters: int = 200
    tol: float = 1e-6
    divergence_slack: float = 0.05
    sample_radius: float = 8.0
    n_samples: int = 1000
    max_doublings: int = 8

    def __post_init__(self):
        for name in ("t_max", "tol", "divergence_slack", "sample_radius"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and value > 0 and math.isfinite(value)):
                raise ValueError(f"invalid budget: {name} must be positive, got {value!r}")
        for name in ("sphere_samples", "t_samples", "refine_iters", "n_samples", "max_doublings"):
            value = getattr(self, name)
            if not (isinstance(value, int) and value > 0):
                raise ValueError(f"invalid budget: {name} must be a positive integer, got {value!r}")
        if self.t_samples < 2:
            raise ValueError("invalid budget: t_samples must be at least 2")

    def replace(self, **changes) -> "SearchBudget":
        return dataclasses.replace(self, **changes)

    def doubled(self) -> "SearchBudget":
        """Same grid spacing on twice the radius; the t grid nests in the old one."""
        return self.replace(t_max=2.0 * self.t_max, t_samples=2 * self.t_samples - 1)

    @classmethod
    def parse(cls, text: str, base: "SearchBudget | None" = None) -> "SearchBudget":
        """Parse ``"t_max=24,tol=1e-7"`` overrides."""
        base = base or cls()
        if not text:
            return base
        fields = {f.name: f.type for f in dataclasses.fields(cls)}
        changes = {}
        for item in text.split(","):
            key, sep, value = item.partition("=")
            key = key.strip()
            if not sep or key not in fields:
                raise ValueError(f"bad budget override {item!r}")
            current = getattr(base, key)
            changes[key] = int(value) if isinstance(current, int) else float(value)
        return base.replace(**changes)


def golden_section(g: Callable[[float], float], lo: float, hi: float, tol: float = 1e-8):
    """Minimize a unimodal ``g`` on ``[lo, hi]``; returns ``(argmin, min)``."""
    if not lo < hi:
        raise ValueError("golden_section needs lo < hi")
    invphi = (math.sqrt(5.0) - 1.0) / 2.0

    def ev(t):
        value = float(g(t))
        if math.isnan(value):
            raise ValueError(f"objective returned NaN at t={t}")
        return value

    a, b = float(lo), float(hi)
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = ev(c), ev(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = ev(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = ev(d)
    return (c, fc) if fc <= fd else (d, fd)


def sphere_coefficients(dim: int, n: int, seed: int = 0) -> np.ndarray:
    """Unit vectors in R^dim covering the sphere: an angle grid for dim 2,
    a Fibonacci lattice for dim 3, seeded Gaussian draws above."""
    if dim == 1:
        return np.array([[1.0], [-1.0]])
    if dim == 2:
        th = 2.0 * np.pi * np.arange(n) / n
        return np.stack([np.cos(th), np.sin(th)], axis=-1)
    if dim == 3:
        i = np.arange(n) + 0.5
        z = 1.0 - 2.0 * i / n
        r = np.sqrt(1.0 - z * z)
        phi = np.pi * (3.0 - np.sqrt(5.0)) * i
        return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=-1)
    rng = np.random.default_rng(seed)
    c = rng.standard_normal((n, dim))
    return c / np.linalg.norm(c, axis=-1, keepdims=True)


@dataclass
class CylinderResult:
    value: float
    t: float
    coeffs: np.ndarray  # unit coefficients of v in tangent_basis(p)
    v: np.ndarray
    grid_value: float
    evaluations: int

    @property
    def is_minus_infinity(self) -> bool:
        return self.value == -np.inf


def _chart(c0: np.ndarray):
    """Gnomonic chart ``a -> normalize(c0 + W a)`` with ``W`` spanning c0-perp."""
    dim = c0.shape[0]
    q, _ = np.linalg.qr(np.column_stack([c0, np.eye(dim)]))
    w = q[:, 1:dim]

    def to_sphere(a):
        c = c0 + w @ a
        return c / np.linalg.norm(c)

    return to_sphere


def _pick(values: np.ndarray, order_keys: np.ndarray) -> int:
    """Index of the maximum; ties go to the smallest key row (lexicographic)."""
    best = np.max(values)
    idx = np.flatnonzero(values == best)
    if idx.size == 1:
        return int(idx[0])
    keys = order_keys[idx]
    return int(idx[np.lexsort(keys.T[::-1])[0]])


def maximize_cylinder(obj, space: Manifold, p, budget: SearchBudget, *,
                      seed: int = 0, restart: bool = True) -> CylinderResult:
    """Maximize ``obj`` over unit tangents at ``p`` times ``t in [0, t_max]``.

    ``obj(V, t)`` receives tangents ``V`` of shape ``(S, *point_shape)`` and
    radii ``t`` of shape ``(M,)`` and returns an ``(S, M)`` array. ``-inf``
    marks excluded cells; NaN is an error.
    """
    basis = space.tangent_basis(p)
    coeffs = sphere_coefficients(space.dim, budget.sphere_samples, seed)
    dirs = np.tensordot(coeffs, basis, axes=([1], [0]))
    ts = np.linspace(0.0, budget.t_max, budget.t_samples)
    grid = np.asarray(obj(dirs, ts), dtype=float)
    if grid.shape != (len(dirs), len(ts)):
        raise ValueError(f"objective returned shape {grid.shape}")
    if np.any(np.isnan(grid)):
        raise ValueError("objective returned NaN on the search grid")
    evaluations = grid.size

    if np.all(grid == -np.inf):
        return CylinderResult(-np.inf, 0.0, coeffs[0], dirs[0], -np.inf, evaluations)

    flat = grid.ravel()
    # tie-break: smallest t, then lexicographic direction coefficients
    keys = np.column_stack([np.tile(ts, len(dirs)), np.repeat(coeffs, len(ts), axis=0)])
    best_idx = _pick(flat, keys)
    si, ti = divmod(best_idx, len(ts))
    best = (float(flat[best_idx]), float(ts[ti]), coeffs[si])
    grid_value = best[0]

    spacing = _sphere_spacing(space.dim, len(coeffs))
    dt = ts[1] - ts[0]

    # t = 0 collapses every direction to p; seed the direction from the
    # first positive radius so refinement can leave the apex of the cylinder
    start_si = si
    if ti == 0 and np.any(grid[:, 1] > -np.inf):
        start_si = _pick(grid[:, 1], coeffs)
    starts = [(coeffs[start_si], float(ts[ti]))]
    if restart:
        cosang = np.clip(coeffs @ coeffs[si], -1.0, 1.0)
        far_dir = np.arccos(cosang) > 2.5 * spacing
        far_t = np.abs(ts - ts[ti]) > 2.5 * dt
        mask = far_dir[:, None] | far_t[None, :]
        masked = np.where(mask, grid, -np.inf).ravel()
        if np.any(np.isfinite(masked)):
            sj, tj = divmod(_pick(masked, keys), len(ts))
            starts.append((coeffs[sj], float(ts[tj])))

    best, n_eval = refine_cylinder(obj, space, p, budget, starts, best, spacing=spacing, dt=dt)
    value, t, c = best
    v = np.tensordot(c, basis, axes=([0], [0]))
    return CylinderResult(value, t, c, v, grid_value, evaluations + n_eval)


def _sphere_spacing(dim: int, n: int) -> float:
    if dim == 1:
        return np.pi
    if dim == 2:
        return 2.0 * np.pi / n
    return math.sqrt(4.0 * np.pi / n)


def refine_cylinder(obj, space: Manifold, p, budget: SearchBudget, starts, best,
                    *, spacing: float, dt: float):
    """Nelder-Mead from each ``(coeffs, t)`` start in a gnomonic chart.

    ``best`` is the incumbent ``(value, t, coeffs)``; the returned incumbent
    is never worse. Returns ``(best, evaluations)``.
    """
    basis = space.tangent_basis(p)
    ndir = space.dim - 1
    evaluations = 0
    for c0, t0 in starts:
        to_sphere = _chart(np.asarray(c0, dtype=float))

        def unpack(z, to_sphere=to_sphere, c0=c0):
            c = to_sphere(z[:ndir]) if ndir else np.asarray(c0, dtype=float)
            t = min(max(z[ndir], 0.0), budget.t_max)
            return c, t

        def neg(z, unpack=unpack):
            c, t = unpack(z)
            v = np.tensordot(c, basis, axes=([0], [0]))[None]
            val = float(np.asarray(obj(v, np.array([t])))[0, 0])
            if math.isnan(val):
                raise ValueError("objective returned NaN during refinement")
            return -val if val > -np.inf else np.inf

        x0 = np.zeros(ndir + 1)
        x0[ndir] = t0
        simplex = np.tile(x0, (ndir + 2, 1))
        for j in range(ndir):
            simplex[j + 1, j] += 0.5 * math.tan(min(spacing, 1.0))
        simplex[ndir + 1, ndir] += 0.5 * dt if t0 < budget.t_max else -0.5 * dt
        res = minimize(neg, x0, method="Nelder-Mead",
                       options=dict(maxiter=budget.refine_iters, maxfev=4 * budget.refine_iters,
                                    initial_simplex=simplex, xatol=1e-10, fatol=1e-14))
        evaluations += int(res.nfev)
        val = -float(res.fun)
        if val > best[0]:
            c, t = unpack(res.x)
            best = (val, t, c)
    return best, evaluations


def maximize_sphere(obj, space: Manifold, p, budget: SearchBudget, *, seed: int = 0):
    """Maximize ``obj(V) -> (S,)`` over unit tangents at ``p``."""
    single = budget.replace(t_samples=2, t_max=1.0)

    def lifted(v, t):
        vals = np.asarray(obj(v), dtype=float)
        return np.repeat(vals[:, None], len(t), axis=1)

    res = maximize_cylinder(lifted, space, p, single, seed=seed)
    return res.value, res.v


def fd_gradient(g, space: Manifold, p, h: float = 1e-4) -> np.ndarray:
    """Central-difference Riemannian gradient of ``g`` at ``p``.

    ``g`` must accept a batch of points ``(N, *point_shape)`` and return
    ``(N,)`` values.
    """
    basis = space.tangent_basis(p)
    steps = np.concatenate([h * basis, -h * basis])
    pts = space.exp(np.broadcast_to(p, steps.shape), steps)
    vals = np.asarray(g(pts), dtype=float)
    n = len(basis)
    slopes = (vals[:n] - vals[n:]) / (2.0 * h)
    return np.tensordot(slopes, basis, axes=([0], [0]))
