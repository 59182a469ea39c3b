"""Biconjugate ``f** = (f*)*`` by a nested sup with memoized inner values."""

from __future__ import annotations

import threading
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from ..functions import FunctionSpec
from ..horoball import Ray, busemann
from ..search import (SearchBudget, _pick, _sphere_spacing, refine_cylinder,
                      sphere_coefficients)
from .core import ExtScalar, conjugate

__all__ = ["BiconjugateSolver", "BiconjugateResult", "DomainPoint", "biconjugate"]

# excluded grid nodes, with none accepted, before the domain search runs
DOMAIN_TRIGGER = 16


@dataclass
class BiconjugateResult:
    value: ExtScalar
    t: float  # outer witness: z = exp_p(-t v)
    v: np.ndarray
    inner_radius: float
    inner_evaluations: int
    excluded_nodes: int  # outer nodes whose inner conjugate diverged
    notes: list = field(default_factory=list)


@dataclass
class DomainPoint:
    """A point where the truncated conjugate has stopped growing."""

    z: np.ndarray
    t: float
    coeffs: np.ndarray
    value: ExtScalar
    evaluations: int


class BiconjugateSolver:
    """``x -> f**_p(x)`` for a fixed ``(f, p, budget)``.

    The outer search runs over ``z = exp_p(-t v)`` on the same cylinder grid
    as a conjugate. Inner values ``f*_p(z)`` are computed lazily, one full
    conjugate (grid, refinement and divergence probe) per outer grid node,
    and cached by node so that every ``x`` shares them. A diverging or
    ``+inf`` inner value is treated as ``+inf``, i.e. the node is excluded.

    Nodes are visited in decreasing order of an upper bound on the outer
    objective obtained from grid-only inner values (a grid maximum is a
    lower bound for ``f*``); the visit stops once the bound drops below the
    incumbent, so the grid stage is exact without evaluating every node.

    When ``f*`` is finite only on a small set (Busemann functions), no grid
    node need be accepted. After ``DOMAIN_TRIGGER`` exclusions the solver
    then locates a point of the effective domain by minimizing the
    divergence growth, starting from the node of smallest grid-level growth,
    and uses it as the incumbent.
    """

    def __init__(self, f: FunctionSpec, p, budget: SearchBudget | None = None,
                 outer_budget: SearchBudget | None = None, seed: int = 0):
        self.f = f
        self.space = f.space
        self.p = self.space.check_point(p)
        self.budget = budget or SearchBudget()
        self.outer = outer_budget or self.budget
        self.seed = seed
        self._cache: dict = {}
        self._lock = threading.Lock()
        self._domain: DomainPoint | None = None
        self._domain_tried = False
        self.inner_evaluations = 0

        space = self.space
        basis = space.tangent_basis(self.p)
        self.coeffs = sphere_coefficients(space.dim, self.outer.sphere_samples, seed)
        self.dirs = np.tensordot(self.coeffs, basis, axes=([1], [0]))
        self.ts = np.linspace(0.0, self.outer.t_max, self.outer.t_samples)
        S, M = len(self.dirs), len(self.ts)
        tv = -self.ts[None, :, None] * self.dirs.reshape(S, 1, -1)
        tv = tv.reshape((S, M) + space.point_shape)
        self.nodes = space.exp(np.broadcast_to(self.p, tv.shape), tv)
        self._lower = self._grid_lower_bounds(self.budget)

    # -- inner values -----------------------------------------------------------
    def _grid_lower_bounds(self, budget: SearchBudget) -> np.ndarray:
        """Grid-only inner conjugate at every outer node, shape ``(S, M)``."""
        space, p = self.space, self.p
        basis = space.tangent_basis(p)
        coeffs = sphere_coefficients(space.dim, budget.sphere_samples, self.seed)
        dirs = np.tensordot(coeffs, basis, axes=([1], [0]))
        ts = np.linspace(0.0, budget.t_max, budget.t_samples)
        with np.errstate(over="ignore", invalid="ignore"):
            fv = self.f.along(p, -dirs, ts)  # (S', M')
        fv = np.where(np.isnan(fv), np.inf, fv)
        flat_nodes = self.nodes.reshape((-1,) + space.point_shape)
        lower = np.full(len(flat_nodes), -np.inf)
        chunk = 512
        for i in range(0, len(flat_nodes), chunk):
            zs = flat_nodes[i:i + chunk]
            bz = busemann(Ray(space, p, dirs[:, None]), zs[None])  # (S', Z)
            best = np.full(len(zs), -np.inf)
            for s in range(len(dirs)):
                vals = ts[None, :] * bz[s][:, None] - fv[s][None, :]
                best = np.maximum(best, vals.max(axis=1))
            lower[i:i + chunk] = best
        return lower.reshape(self.nodes.shape[:2])

    def _key(self, si: int, ti: int):
        return (0, 0) if ti == 0 else (si, ti)

    def inner(self, si: int, ti: int) -> ExtScalar:
        key = self._key(si, ti)
        with self._lock:
            hit = self._cache.get(key)
        if hit is not None:
            return hit
        val, _ = conjugate(self.f, self.p, self.nodes[si, ti], self.budget, seed=self.seed)
        with self._lock:
            self._cache[key] = val
            self.inner_evaluations += 1
        return val

    def inner_at(self, v, t) -> ExtScalar:
        z = self.space.exp(self.p, -t * v)
        return self.inner_point(z)

    def inner_point(self, z) -> ExtScalar:
        with self._lock:
            self.inner_evaluations += 1
        val, _ = conjugate(self.f, self.p, z, self.budget, seed=self.seed)
        return val

    @staticmethod
    def _excluded(val: ExtScalar) -> bool:
        return val.is_diverging or val.is_plus_infinity

    # -- effective domain ---------------------------------------------------------
    def domain_point(self) -> DomainPoint | None:
        """A point ``z`` whose truncated conjugate is stable between ``t_max``
        and ``2 t_max`` (growth at most ``budget.tol``), or ``None``.

        Computed once per solver: a simplex search in normal coordinates at
        ``p`` minimizes the probe growth, starting from the outer node with
        the smallest grid-level growth.
        """
        if self._domain_tried:
            return self._domain
        self._domain_tried = True
        space, p, b = self.space, self.p, self.budget
        growth_grid = self._grid_lower_bounds(b.doubled()) - self._lower
        si, ti = np.unravel_index(int(np.argmin(growth_grid)), growth_grid.shape)
        start = space.to_coords(p, space.log(p, self.nodes[si, ti]))

        seen = {}

        def growth(c):
            z = space.exp(p, space.from_coords(p, c))
            val = self.inner_point(z)
            g = val.growth if val.growth is not None else np.inf
            seen[tuple(c)] = (g, z, val)
            if g <= b.tol and val.is_finite:
                raise StopIteration
            return g

        step = max(self.ts[1] - self.ts[0], 1e-3)
        simplex = np.vstack([start, start + step * np.eye(len(start))])
        try:
            minimize(growth, start, method="Nelder-Mead",
                     options=dict(maxfev=b.refine_iters, initial_simplex=simplex,
                                  xatol=1e-9, fatol=1e-12))
        except StopIteration:
            pass
        if not seen:
            return None
        g, z, val = min(seen.values(), key=lambda item: item[0])
        if not val.is_finite:
            return None
        w = -space.log(p, z)
        t = float(space.norm(p, w))
        c = space.to_coords(p, w / t) if t > 0 else self.coeffs[0]
        self._domain = DomainPoint(z, t, c, val, len(seen))
        return self._domain

    # -- outer sup --------------------------------------------------------------
    def __call__(self, x, *, refine: bool = True) -> BiconjugateResult:
        space, p = self.space, self.p
        x = space.check_point(x)
        S, M = len(self.dirs), len(self.ts)
        notes = []
        # H_p(z, x) = t B^p_v(x) at z = exp_p(-t v)
        bx = busemann(Ray(space, p, self.dirs), x)
        kern = self.ts[None, :] * bx[:, None]
        upper = (kern - self._lower).ravel()
        order = np.argsort(-upper, kind="stable")
        keys = np.column_stack([np.tile(self.ts, S), np.repeat(self.coeffs, M, axis=0)])

        values = np.full(S * M, -np.inf)
        best = -np.inf
        excluded = 0
        domain_value = -np.inf
        domain_tried = False
        for idx in order:
            if best == -np.inf and excluded >= DOMAIN_TRIGGER and not domain_tried:
                domain_tried = True
                dom = self.domain_point()
                if dom is not None:
                    v = np.tensordot(dom.coeffs, space.tangent_basis(p), axes=([0], [0]))
                    kd = float(dom.t * busemann(Ray(space, p, v), x))
                    domain_value = best = kd - dom.value.value
                    notes.append("incumbent from the located domain point")
            if upper[idx] <= best or upper[idx] == -np.inf:
                break
            si, ti = divmod(int(idx), M)
            val = self.inner(si, ti)
            if val.status == "minus_infinity":
                return BiconjugateResult(ExtScalar.plus_infinity(), float(self.ts[ti]),
                                         self.dirs[si], self.budget.t_max,
                                         self.inner_evaluations, excluded, notes)
            if self._excluded(val):
                excluded += 1
                continue
            values[idx] = kern.ravel()[idx] - val.value
            best = max(best, values[idx])

        incumbent = None
        if np.any(values > -np.inf):
            bi = _pick(values, keys)
            si, ti = divmod(bi, M)
            incumbent = (float(values[bi]), float(self.ts[ti]), self.coeffs[si])
        if np.isfinite(domain_value) and (incumbent is None or domain_value > incumbent[0]):
            dom = self._domain
            incumbent = (float(domain_value), dom.t, dom.coeffs)
        if incumbent is None:
            return BiconjugateResult(ExtScalar.minus_infinity(), 0.0, self.dirs[0],
                                     self.budget.t_max, self.inner_evaluations, excluded, notes)

        basis = space.tangent_basis(p)
        if incumbent[1] == 0.0:
            # at z = p every direction ties; seed with the steepest kernel slope
            incumbent = (incumbent[0], 0.0, self.coeffs[_pick(bx, self.coeffs)])
        if refine:
            def obj(V, t):
                out = np.empty((len(V), len(t)))
                bV = busemann(Ray(space, p, V), x)
                for i in range(len(V)):
                    for j in range(len(t)):
                        val = self.inner_at(V[i], t[j])
                        out[i, j] = -np.inf if self._excluded(val) else t[j] * bV[i] - val.value
                return out

            spacing = _sphere_spacing(space.dim, len(self.coeffs))
            dt = self.ts[1] - self.ts[0]
            incumbent, _ = refine_cylinder(obj, space, p, self.outer, [(incumbent[2], incumbent[1])],
                                           incumbent, spacing=spacing, dt=dt)
        value, t, c = incumbent
        v = np.tensordot(c, basis, axes=([0], [0]))
        return BiconjugateResult(ExtScalar.finite(value, self.budget.t_max), float(t), v,
                                 self.budget.t_max, self.inner_evaluations, excluded, notes)


def biconjugate(f: FunctionSpec, p, x, budget: SearchBudget | None = None, *,
                solver: BiconjugateSolver | None = None, refine: bool = True) -> ExtScalar:
    """``f**_p(x)``; pass a shared ``solver`` to reuse inner values across ``x``.

    The returned value carries the inner truncation radius as ``radius``.
    """
    solver = solver or BiconjugateSolver(f, p, budget)
    return solver(x, refine=refine).value
