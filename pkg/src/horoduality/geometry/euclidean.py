from __future__ import annotations

import numpy as np

from .base import Manifold

__all__ = ["Euclidean"]


class Euclidean(Manifold):
    """Flat space R^n; points and tangents are length-n vectors."""

    kind = "Euclidean"

    def __init__(self, n: int):
        if n < 1:
            raise ValueError("dimension must be positive")
        self.dim = int(n)
        self.point_shape = (self.dim,)

    @property
    def name(self) -> str:
        return f"E{self.dim}"

    def __eq__(self, other):
        return isinstance(other, Euclidean) and other.dim == self.dim

    def __hash__(self):
        return hash((self.kind, self.dim))

    def origin(self):
        return np.zeros(self.dim)

    def dist(self, x, y):
        x, y = self._bcast(x, y)
        return np.linalg.norm(x - y, axis=-1)

    def exp(self, p, v):
        p, v = self._bcast(p, v)
        return p + v

    def log(self, p, q):
        p, q = self._bcast(p, q)
        return q - p

    def inner(self, p, u, v):
        u, v = self._bcast(u, v)
        return np.sum(u * v, axis=-1)

    def tangent_basis(self, p):
        return np.eye(self.dim)

    def curvature_form(self, p, u, v):
        u, v = self._bcast(u, v)
        return np.zeros(u.shape[:-1])

    def ray_distance(self, base, direction, x, t):
        base, direction, x = self._bcast(base, direction, x)
        t = np.asarray(t, dtype=float)
        return np.linalg.norm(x - base - t[..., None] * direction, axis=-1)
