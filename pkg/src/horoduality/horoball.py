"""Rays, Busemann functions, asymptotic rays and the kernel ``H_p``.

Closed forms are used on Euclidean, hyperbolic and product spaces. SPD has
no closed form here; its Busemann functions are evaluated as the numeric
limit ``d(x, gamma(T)) - T``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import Euclidean, Hyperbolic, Manifold, Product, SpaceMismatch, minkowski
from .search import SearchBudget, fd_gradient

__all__ = [
    "Ray",
    "BusemannConvergenceError",
    "make_ray",
    "busemann",
    "busemann_numeric",
    "asymptote",
    "asymptote_gap",
    "h_kernel",
    "NUMERIC_BUSEMANN_BUDGET",
]

# Budget used when ``busemann`` has to fall back on the numeric limit.
NUMERIC_BUSEMANN_BUDGET = SearchBudget(t_max=8.0, tol=1e-11, max_doublings=11)


class BusemannConvergenceError(RuntimeError):
    """The truncated Busemann limit did not settle within the doubling budget."""


@dataclass(frozen=True, eq=False)
class Ray:
    """Unit-speed geodesic ray ``t -> exp_base(t dir)``.

    ``dir`` may carry leading batch axes, giving a family of rays from the
    same base point.
    """

    space: Manifold
    base: np.ndarray
    dir: np.ndarray

    def point(self, t):
        return self.space.geodesic(self.base, self.dir, t)


def make_ray(space: Manifold, p, u, tol: float = 1e-14) -> Ray:
    p = space.check_point(p)
    u = space.check_tangent(p, u)
    n = space.norm(p, u)
    if np.any(n <= tol):
        raise ValueError("cannot build a ray from the zero vector")
    return Ray(space, p, u / n[(...,) + (None,) * space.point_ndim])


def busemann(ray: Ray, x, budget: SearchBudget | None = None) -> np.ndarray:
    """``B(x) = lim_t d(x, gamma(t)) - t`` for the ray ``gamma``."""
    space = ray.space
    x = np.asarray(x, dtype=float)
    space.batch_shape(x)
    if isinstance(space, Euclidean):
        return -np.sum(ray.dir * (x - ray.base), axis=-1)
    if isinstance(space, Hyperbolic):
        k = space.k
        ideal = ray.base + ray.dir / k
        return np.log(-k * k * minkowski(x, ideal)) / k
    if isinstance(space, Product):
        total = 0.0
        for m, b, v, y in zip(space.factors, space.split(ray.base),
                              space.split(ray.dir), space.split(x)):
            s = m.norm(b, v)
            live = s > 0.0
            unit = v / np.where(live, s, 1.0)[(...,) + (None,) * m.point_ndim]
            if not np.all(live):
                # zero-weight factors drop out; give them a harmless direction
                fallback = m.tangent_basis(b)[0]
                unit = np.where(live[(...,) + (None,) * m.point_ndim], unit, fallback)
            part = busemann(Ray(m, b, unit), y, budget)
            total = total + np.where(live, s * part, 0.0)
        return total
    return busemann_numeric(ray, x, budget or NUMERIC_BUSEMANN_BUDGET)


def busemann_numeric(ray: Ray, x, budget: SearchBudget | None = None,
                     extrapolate: bool = True) -> np.ndarray:
    """Truncated limit ``r(T) = d(x, gamma(T)) - T`` with ``T = t_max * 2^j``.

    The raw sequence is non-increasing in ``T`` (triangle inequality), which
    is checked. Its tail decays like ``1/T`` whenever there is a flat
    direction, which is too slow to reach tight tolerances. With
    ``extrapolate`` the estimate is instead taken from consecutive radii as

        2 r(2T) - r(T) + (r(2T)^2 - r(T)^2) / (2T),

    which is the limit read off ``d^2 - T^2`` being affine in ``T`` up to
    exponentially small terms (exact in Euclidean space). Successive
    differences ``delta_j`` of the estimates are treated as a geometric tail
    with ratio ``rho = delta_j / delta_{j-1}``; convergence is declared once
    ``delta_j``, or for ``rho < 1/2`` the predicted remaining error
    ``delta_j rho / (1 - rho)``, is below ``budget.tol``.
    """
    budget = budget or SearchBudget()
    space = ray.space
    x = np.asarray(x, dtype=float)
    space.batch_shape(x)

    prev_est = None
    prev_raw = None
    prev_delta = None
    result = None
    done = None
    for j in range(budget.max_doublings + 1):
        T = budget.t_max * 2.0 ** j
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            raw = np.asarray(space.ray_distance(ray.base, ray.dir, x, T) - T, dtype=float)
        if result is None:
            result = np.full(raw.shape, np.nan)
            done = np.zeros(raw.shape, dtype=bool)
        finite = np.isfinite(raw)
        est = None
        if prev_raw is not None:
            slack = 1e-9 * max(1.0, T)
            bad = finite & np.isfinite(prev_raw) & (raw > prev_raw + slack) & ~done
            if np.any(bad):
                raise BusemannConvergenceError(
                    f"truncated Busemann sequence increased at T={T:g} "
                    f"(by {np.max((raw - prev_raw)[bad]):.3g})")
            if extrapolate:
                # T here is twice the previous radius
                with np.errstate(invalid="ignore"):
                    est = 2.0 * raw - prev_raw + (raw * raw - prev_raw * prev_raw) / T
                finite = finite & np.isfinite(prev_raw)
            else:
                est = raw
        if est is not None and prev_est is not None:
            delta = np.abs(est - prev_est)
            err = delta
            if prev_delta is not None:
                with np.errstate(divide="ignore", invalid="ignore"):
                    rho = delta / prev_delta
                    tail = delta * rho / (1.0 - rho)
                # only trust the tail prediction for a clearly contracting sequence
                err = np.where(rho < 0.5, np.minimum(delta, tail), delta)
            conv = finite & (err < budget.tol) & ~done
            result = np.where(conv, est, result)
            done = done | conv
            if np.all(done):
                return result
            if not np.any(finite & ~done):
                break
            prev_delta = delta
        prev_raw = raw
        if est is not None:
            prev_est = est
    raise BusemannConvergenceError(
        f"numeric Busemann limit did not converge to tol={budget.tol:g} "
        f"for {int(np.sum(~done))} of {done.size} points within "
        f"{budget.max_doublings} doublings from T={budget.t_max:g}")


def asymptote(q, ray: Ray, budget: SearchBudget | None = None) -> Ray:
    """The ray from ``q`` asymptotic to ``ray`` (same ideal endpoint)."""
    space = ray.space
    q = np.asarray(q, dtype=float)
    space.batch_shape(q)
    if isinstance(space, Euclidean):
        return Ray(space, q, np.broadcast_to(ray.dir, q.shape).copy())
    if isinstance(space, Hyperbolic):
        k = space.k
        ideal = ray.base + ray.dir / k
        c = -k * k * minkowski(q, ideal)
        w = k * (ideal / c[..., None] - q)
        w = space.project_tangent(q, w)
        w = w / space.norm(q, w)[..., None]
        return Ray(space, q, w)
    if isinstance(space, Product):
        parts = []
        for m, b, v, y in zip(space.factors, space.split(ray.base),
                              space.split(ray.dir), space.split(q)):
            s = m.norm(b, v)
            if np.all(s == 0.0):
                parts.append(np.zeros(np.broadcast_shapes(v.shape, y.shape)))
                continue
            sub = asymptote(y, Ray(m, b, v / s[(...,) + (None,) * m.point_ndim]), budget)
            parts.append(s[(...,) + (None,) * m.point_ndim] * sub.dir)
        return Ray(space, q, space.join(*parts))
    # no closed form: the asymptotic direction is minus the Busemann gradient
    budget = budget or NUMERIC_BUSEMANN_BUDGET
    grad = fd_gradient(lambda pts: busemann(ray, pts, budget), space, q, h=1e-4)
    n = float(space.norm(q, grad))
    if n < 1e-8:
        raise ValueError("degenerate Busemann gradient; asymptote undefined")
    return Ray(space, q, -grad / n)


def asymptote_gap(r1: Ray, r2: Ray, t_max: float = 20.0, n: int = 81) -> float:
    """``sup_{t in [0, t_max]} d(r1(t), r2(t))`` on a uniform grid.

    Hyperbolic factors use a cancellation-free form, so that asymptotic rays
    stay resolvable at large ``t``. The inputs themselves bound the accuracy:
    rounding in the ray data is amplified by ``exp(k t)``, so for curvature
    ``-k^2`` the gap is meaningful only while ``k t_max`` stays below about 18.
    """
    ts = np.linspace(0.0, t_max, n)
    sq = _ray_pair_dist_sq(r1.space, r1.base, r1.dir, r2.base, r2.dir, ts)
    return float(np.sqrt(np.max(sq)))


def _ray_pair_dist_sq(space: Manifold, b1, v1, b2, v2, ts) -> np.ndarray:
    """``d(exp_b1(t v1), exp_b2(t v2))^2`` for ``t`` in ``ts``."""
    if isinstance(space, Product):
        total = 0.0
        for m, x1, u1, x2, u2 in zip(space.factors, space.split(b1), space.split(v1),
                                     space.split(b2), space.split(v2)):
            total = total + _ray_pair_dist_sq(m, x1, u1, x2, u2, ts)
        return total
    s1, s2 = float(space.norm(b1, v1)), float(space.norm(b2, v2))
    if isinstance(space, Hyperbolic) and s1 > 0.0 and s2 > 0.0:
        # exp_b(t v) = e^{k s t} a + e^{-k s t} c with null a, c; the leading
        # term <a1, a2> = -|a1_0| |a2_0| |u1 - u2|^2 / 2 (u the unit spatial
        # parts) is computed without cancellation
        k = space.k
        a1, c1 = 0.5 * (b1 + v1 / (k * s1)), 0.5 * (b1 - v1 / (k * s1))
        a2, c2 = 0.5 * (b2 + v2 / (k * s2)), 0.5 * (b2 - v2 / (k * s2))
        u1 = a1[:-1] / np.linalg.norm(a1[:-1])
        u2 = a2[:-1] / np.linalg.norm(a2[:-1])
        aa = -0.5 * a1[-1] * a2[-1] * float(np.sum((u1 - u2) ** 2))
        e1, e2 = np.exp(k * s1 * ts), np.exp(k * s2 * ts)
        inner = (e1 * e2 * aa + e1 / e2 * minkowski(a1, c2) + e2 / e1 * minkowski(c1, a2)
                 + minkowski(c1, c2) / (e1 * e2))
        return (np.arccosh(np.maximum(-k * k * inner, 1.0)) / k) ** 2
    p1 = space.geodesic(b1, v1, ts)
    p2 = space.geodesic(b2, v2, ts)
    return space.dist(p1, p2) ** 2


def h_kernel(space: Manifold, p, z, y, budget: SearchBudget | None = None) -> np.ndarray:
    """``H_p(z, y) = d(z, p) B^p_{-log_p z}(y)``, and 0 when ``z = p``.

    Broadcasts over batches of ``z`` and ``y``.
    """
    p = np.asarray(p, dtype=float)
    z = np.asarray(z, dtype=float)
    y = np.asarray(y, dtype=float)
    if space.batch_shape(p) != ():
        raise SpaceMismatch("h_kernel expects a single base point p")
    space.batch_shape(y)
    v = space.log(np.broadcast_to(p, z.shape), z)
    d = space.dist(p, z)
    at_p = d < 1e-12
    pad = (...,) + (None,) * space.point_ndim
    dirs = -v / np.where(at_p, 1.0, d)[pad]
    if np.any(at_p):
        dirs = np.where(at_p[pad], space.tangent_basis(p)[0], dirs)
    b = busemann(Ray(space, p, dirs), y, budget)
    return np.where(at_p, 0.0, d * b)
