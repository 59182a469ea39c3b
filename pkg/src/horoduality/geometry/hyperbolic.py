"""Hyperbolic space H^n_k of constant curvature -k^2, hyperboloid model.

Points live on the upper sheet ``<x, x>_L = -1/k^2``, ``x[-1] > 0`` of
Minkowski space R^{n,1} with ``<x, y>_L = sum_{i<n} x_i y_i - x_n y_n``
(time coordinate last).
"""

from __future__ import annotations

import numpy as np

from .base import InvalidPoint, InvalidTangent, Manifold

__all__ = ["Hyperbolic", "minkowski"]


def minkowski(x, y) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return np.sum(x[..., :-1] * y[..., :-1], axis=-1) - x[..., -1] * y[..., -1]


class Hyperbolic(Manifold):
    kind = "Hyperbolic"

    def __init__(self, n: int, k: float = 1.0):
        if n < 1:
            raise ValueError("dimension must be positive")
        if not k > 0:
            raise ValueError("curvature scale k must be positive")
        self.dim = int(n)
        self.k = float(k)
        self.point_shape = (self.dim + 1,)
        self.curvature_bounds = (self.k, self.k)

    @property
    def name(self) -> str:
        return f"H{self.dim}" if self.k == 1.0 else f"H{self.dim}(k={self.k:g})"

    def __eq__(self, other):
        return isinstance(other, Hyperbolic) and (other.dim, other.k) == (self.dim, self.k)

    def __hash__(self):
        return hash((self.kind, self.dim, self.k))

    def origin(self):
        x = np.zeros(self.dim + 1)
        x[-1] = 1.0 / self.k
        return x

    def polar(self, r, theta):
        """``exp_o(r (cos theta, sin theta, 0))`` at the origin of H^2."""
        if self.dim != 2:
            raise ValueError("polar coordinates are only defined for H^2")
        r = np.asarray(r, dtype=float)
        theta = np.asarray(theta, dtype=float)
        kr = self.k * r
        s = np.sinh(kr) / self.k
        return np.stack(np.broadcast_arrays(s * np.cos(theta), s * np.sin(theta),
                                            np.cosh(kr) / self.k), axis=-1)

    # -- validation ----------------------------------------------------------
    def check_point(self, x, tol: float = 1e-10):
        x = super().check_point(x)
        scale = np.maximum(1.0, np.sum(x * x, axis=-1) * self.k ** 2)
        err = np.abs(minkowski(x, x) * self.k ** 2 + 1.0) / scale
        if np.any(err > tol) or np.any(x[..., -1] <= 0):
            raise InvalidPoint("point is not on the upper sheet of the hyperboloid")
        return x

    def check_tangent(self, p, v, tol: float = 1e-10):
        v = super().check_tangent(p, v)
        scale = np.maximum(1.0, np.sqrt(np.sum(np.asarray(p) ** 2, -1) * np.sum(v * v, -1)))
        if np.any(np.abs(minkowski(p, v)) > tol * scale):
            raise InvalidTangent("vector is not Minkowski-orthogonal to its base point")
        return v

    def project_tangent(self, p, v):
        p = np.asarray(p, dtype=float)
        v = np.asarray(v, dtype=float)
        return v + (self.k ** 2 * minkowski(p, v))[..., None] * p

    def normalize(self, x):
        """Rescale ambient vectors back onto the sheet (overflow-safe)."""
        x = np.asarray(x, dtype=float)
        m = np.max(np.abs(x), axis=-1, keepdims=True)
        m = np.where(m > 0, m, 1.0)
        y = x / m
        q = -minkowski(y, y) * self.k ** 2
        if np.any(q <= 0):
            raise InvalidPoint("vector is not time-like")
        y = y / np.sqrt(q)[..., None]
        return y * np.sign(y[..., -1:])

    # -- geometry ---------------------------------------------------------------
    def _cosh_dist(self, x, y):
        return np.maximum(-self.k ** 2 * minkowski(x, y), 1.0)

    def dist(self, x, y):
        x, y = self._bcast(x, y)
        c = self._cosh_dist(x, y)
        # chord form for nearby points: arccosh loses all digits near 1
        diff = x - y
        chord2 = np.maximum(minkowski(diff, diff), 0.0) * self.k ** 2
        near = 2.0 * np.arcsinh(0.5 * np.sqrt(chord2))
        return np.where(c < 2.0, near, np.arccosh(c)) / self.k

    def exp(self, p, v):
        p, v = self._bcast(p, v)
        nv = np.sqrt(np.maximum(minkowski(v, v), 0.0))
        r = self.k * nv
        small = r < 1e-8
        rs = np.where(small, 1.0, r)
        sinhc = np.where(small, 1.0 + r * r / 6.0, np.sinh(rs) / rs)
        with np.errstate(over="ignore", invalid="ignore"):
            x = np.cosh(r)[..., None] * p + sinhc[..., None] * v
        # far points are near-null after rescaling, so renormalizing them
        # would cancel catastrophically; the raw formula is accurate there
        fix = (r < 1.0)[..., None]
        if np.all(fix):
            return self.normalize(x)
        safe = np.where(fix, x, p)
        return np.where(fix, self.normalize(safe), x)

    def log(self, p, q):
        p, q = self._bcast(p, q)
        d = self.dist(p, q)
        c = -self.k ** 2 * minkowski(p, q)
        u = q - c[..., None] * p
        kd = self.k * d
        small = kd < 1e-8
        kds = np.where(small, 1.0, kd)
        # |u|_L = sinh(k d)/k, so d u / |u|_L = (kd / sinh kd) u
        factor = np.where(small, 1.0, kds / np.sinh(kds))
        v = factor[..., None] * u
        v = self.project_tangent(p, v)
        return np.where((d == 0.0)[..., None], 0.0, v)

    def inner(self, p, u, v):
        u, v = self._bcast(u, v)
        return minkowski(u, v)

    def tangent_basis(self, p):
        p = np.asarray(p, dtype=float)
        frame = []
        for i in range(self.dim):
            e = np.zeros(self.dim + 1)
            e[i] = 1.0
            w = self.project_tangent(p, e)
            for f in frame:
                w = w - minkowski(w, f) * f
            frame.append(w / np.sqrt(minkowski(w, w)))
        return np.array(frame)

    def curvature_form(self, p, u, v):
        u, v = self._bcast(u, v)
        return -self.k ** 2 * (minkowski(u, u) * minkowski(v, v) - minkowski(u, v) ** 2)

    def ray_distance(self, base, direction, x, t):
        """``d(x, exp_base(t * direction))`` without forming the far point.

        ``cosh(k d)`` is linear in ``(cosh tau, sinh tau)`` with
        ``tau = k |direction| t``; past ``tau = 30`` it is evaluated in log
        space so that rays can be followed beyond the overflow of ``cosh``.
        """
        base, direction, x = self._bcast(base, direction, x)
        t = np.asarray(t, dtype=float)
        k = self.k
        s = np.sqrt(np.maximum(minkowski(direction, direction), 0.0))
        tau = k * s * t
        if np.all(tau <= 30.0):
            return super().ray_distance(base, direction, x, t)
        a = -k * k * minkowski(x, base)
        b = -k * minkowski(x, direction) / np.where(s > 0, s, 1.0)
        far = tau > 30.0
        ts = np.where(far, tau, 31.0)
        log_c = ts - np.log(2.0) + np.log((a + b) + (a - b) * np.exp(-2.0 * ts))
        kd = log_c + np.log1p(np.sqrt(-np.expm1(-2.0 * log_c)))
        near = super().ray_distance(base, direction, x, np.where(far, 0.0, t))
        return np.where(far, kd / k, near)
