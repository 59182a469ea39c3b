from __future__ import annotations

import numpy as np

from .base import Manifold

__all__ = ["Product"]


class Product(Manifold):
    """Riemannian product ``M1 x M2``.

    Coordinates are the flattened factor coordinates concatenated, so a point
    of ``H^2 x R`` is ``(x1, x2, x3, t)``. Larger products nest.
    """

    kind = "Product"

    def __init__(self, first: Manifold, second: Manifold):
        self.factors = (first, second)
        self.dim = first.dim + second.dim
        self.point_shape = (first.size + second.size,)
        self.curvature_bounds = None

    @property
    def name(self) -> str:
        return f"{self.factors[0].name}x{self.factors[1].name}"

    def __eq__(self, other):
        return isinstance(other, Product) and other.factors == self.factors

    def __hash__(self):
        return hash((self.kind, self.factors))

    def split(self, x):
        x = np.asarray(x, dtype=float)
        self.batch_shape(x)
        m1, m2 = self.factors
        lead = x.shape[:-1]
        return (x[..., : m1.size].reshape(lead + m1.point_shape),
                x[..., m1.size:].reshape(lead + m2.point_shape))

    def join(self, x1, x2):
        m1, m2 = self.factors
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        b1 = x1.shape[: x1.ndim - m1.point_ndim]
        b2 = x2.shape[: x2.ndim - m2.point_ndim]
        lead = np.broadcast_shapes(b1, b2)
        x1 = np.broadcast_to(x1, lead + m1.point_shape).reshape(lead + (m1.size,))
        x2 = np.broadcast_to(x2, lead + m2.point_shape).reshape(lead + (m2.size,))
        return np.concatenate([x1, x2], axis=-1)

    def check_point(self, x):
        x = super().check_point(x)
        x1, x2 = self.split(x)
        self.factors[0].check_point(x1)
        self.factors[1].check_point(x2)
        return x

    def check_tangent(self, p, v):
        v = super().check_tangent(p, v)
        (p1, p2), (v1, v2) = self.split(p), self.split(v)
        self.factors[0].check_tangent(p1, v1)
        self.factors[1].check_tangent(p2, v2)
        return v

    def project_tangent(self, p, v):
        (p1, p2), (v1, v2) = self.split(p), self.split(v)
        return self.join(self.factors[0].project_tangent(p1, v1),
                         self.factors[1].project_tangent(p2, v2))

    def origin(self):
        return self.join(self.factors[0].origin(), self.factors[1].origin())

    def _pair(self, method, *args):
        parts = [self.split(a) for a in args]
        m1, m2 = self.factors
        r1 = getattr(m1, method)(*[p[0] for p in parts])
        r2 = getattr(m2, method)(*[p[1] for p in parts])
        return r1, r2

    def dist(self, x, y):
        d1, d2 = self._pair("dist", x, y)
        return np.hypot(d1, d2)

    def exp(self, p, v):
        return self.join(*self._pair("exp", p, v))

    def log(self, p, q):
        return self.join(*self._pair("log", p, q))

    def inner(self, p, u, v):
        a, b = self._pair("inner", p, u, v)
        return a + b

    def curvature_form(self, p, u, v):
        a, b = self._pair("curvature_form", p, u, v)
        return a + b

    def tangent_basis(self, p):
        p1, p2 = self.split(p)
        m1, m2 = self.factors
        zero1 = np.zeros(m1.point_shape)
        zero2 = np.zeros(m2.point_shape)
        first = [self.join(e, zero2) for e in m1.tangent_basis(p1)]
        second = [self.join(zero1, e) for e in m2.tangent_basis(p2)]
        return np.array(first + second)

    def ray_distance(self, base, direction, x, t):
        d1, d2 = (m.ray_distance(b, v, y, t) for m, b, v, y in
                  zip(self.factors, self.split(base), self.split(direction), self.split(x)))
        return np.hypot(d1, d2)
