"""Common interface of the Hadamard spaces.

Points and tangent vectors are plain numpy arrays in the ambient layout of
their space (see each subclass); every method broadcasts over leading batch
axes. A manifold instance doubles as the space descriptor: it carries the
kind, dimension and curvature data of the space.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = ["Manifold", "SpaceMismatch", "InvalidPoint", "InvalidTangent"]


class SpaceMismatch(ValueError):
    """Arrays do not have the layout of the space they are used with."""


class InvalidPoint(ValueError):
    """Coordinates violate the membership invariants of the space."""


class InvalidTangent(ValueError):
    """A vector is not tangent at the claimed base point."""


class Manifold:
    kind: str = "abstract"
    dim: int
    point_shape: tuple[int, ...]
    curvature_bounds: tuple[float, float] | None = None

    # -- layout ------------------------------------------------------------
    @property
    def point_ndim(self) -> int:
        return len(self.point_shape)

    @property
    def size(self) -> int:
        return math.prod(self.point_shape)

    def batch_shape(self, x) -> tuple[int, ...]:
        x = np.asarray(x)
        nd = self.point_ndim
        if x.ndim < nd or x.shape[x.ndim - nd:] != self.point_shape:
            raise SpaceMismatch(
                f"{self.name} expects trailing shape {self.point_shape}, got {x.shape}")
        return x.shape[: x.ndim - nd]

    def _bcast(self, *arrays):
        for a in arrays:
            self.batch_shape(a)
        return np.broadcast_arrays(*[np.asarray(a, dtype=float) for a in arrays])

    @property
    def name(self) -> str:
        return self.kind

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.name})"

    # -- validation --------------------------------------------------------
    def check_point(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        self.batch_shape(x)
        if not np.all(np.isfinite(x)):
            raise InvalidPoint("non-finite coordinates")
        return x

    def check_tangent(self, p, v) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        self.batch_shape(v)
        self.batch_shape(p)
        return v

    def project_tangent(self, p, v) -> np.ndarray:
        """Closest tangent vector at ``p`` (identity for flat layouts)."""
        return np.asarray(v, dtype=float)

    # -- metric geometry (implemented by subclasses) -------------------------
    def origin(self) -> np.ndarray:
        raise NotImplementedError

    def dist(self, x, y) -> np.ndarray:
        raise NotImplementedError

    def exp(self, p, v) -> np.ndarray:
        raise NotImplementedError

    def log(self, p, q) -> np.ndarray:
        raise NotImplementedError

    def inner(self, p, u, v) -> np.ndarray:
        raise NotImplementedError

    def tangent_basis(self, p) -> np.ndarray:
        """Orthonormal basis of ``T_p M`` with shape ``(dim, *point_shape)``."""
        raise NotImplementedError

    def curvature_form(self, p, u, v) -> np.ndarray:
        """``<R(u, v) v, u>`` with the sign making sectional curvature <= 0."""
        raise NotImplementedError

    # -- derived ------------------------------------------------------------
    def norm(self, p, v) -> np.ndarray:
        return np.sqrt(np.maximum(self.inner(p, v, v), 0.0))

    def geodesic(self, p, v, t) -> np.ndarray:
        """``exp_p(t v)`` for scalar or batched ``t`` (broadcast on the left)."""
        t = np.asarray(t, dtype=float)
        v = np.asarray(v, dtype=float)
        tv = t.reshape(t.shape + (1,) * self.point_ndim) * v
        return self.exp(p, tv)

    def ray_distance(self, base, direction, x, t) -> np.ndarray:
        """``d(x, exp_base(t * direction))``.

        Subclasses override this when the generic composition loses
        precision for large ``t``.
        """
        return self.dist(x, self.geodesic(base, direction, t))

    def to_coords(self, p, v) -> np.ndarray:
        """Coefficients of ``v`` in ``tangent_basis(p)``."""
        basis = self.tangent_basis(p)
        v = np.asarray(v, dtype=float)
        return np.stack([self.inner(p, v, e) for e in basis], axis=-1)

    def from_coords(self, p, c) -> np.ndarray:
        basis = self.tangent_basis(p)
        c = np.asarray(c, dtype=float)
        return np.tensordot(c, basis, axes=([-1], [0]))

    def sectional(self, p, u, v) -> np.ndarray:
        """Sectional curvature of the plane spanned by ``u`` and ``v``."""
        uu = self.inner(p, u, u)
        vv = self.inner(p, v, v)
        uv = self.inner(p, u, v)
        area = uu * vv - uv * uv
        if np.any(area <= 1e-14 * np.maximum(uu * vv, 1e-300)):
            raise ValueError("u and v are parallel; the plane is undefined")
        return self.curvature_form(p, u, v) / area

    def ricci_dir(self, p, v, tol: float = 1e-10) -> float:
        """Normalized Ricci curvature ``(1/(dim-1)) sum_i K(v, e_i)``.

        ``{e_i}`` is an orthonormal completion of the unit vector ``v``
        obtained by Gram-Schmidt against ``tangent_basis(p)``.
        """
        if self.dim < 2:
            raise ValueError("Ricci curvature needs dim >= 2")
        nv = float(self.norm(p, v))
        if abs(nv - 1.0) > tol:
            raise ValueError(f"direction must be a unit vector, |v| = {nv}")
        completion = self.orthonormal_completion(p, v)
        total = sum(float(self.sectional(p, v, e)) for e in completion)
        return total / (self.dim - 1)

    def orthonormal_completion(self, p, v, basis=None) -> list[np.ndarray]:
        """Orthonormal vectors spanning the complement of unit ``v``."""
        if basis is None:
            basis = self.tangent_basis(p)
        frame = [np.asarray(v, dtype=float)]
        for e in basis:
            w = np.array(e, dtype=float)
            for f in frame:
                w = w - self.inner(p, w, f) * f
            nw = float(self.norm(p, w))
            if nw > 1e-8:
                frame.append(w / nw)
            if len(frame) == self.dim:
                break
        return frame[1:]

    # -- sampling -------------------------------------------------------------
    def random_unit_tangent(self, p, rng: np.random.Generator, n: int | None = None):
        shape = (self.dim,) if n is None else (n, self.dim)
        c = rng.standard_normal(shape)
        c /= np.linalg.norm(c, axis=-1, keepdims=True)
        return self.from_coords(p, c)

    def random_point(self, rng: np.random.Generator, n: int | None = None,
                     radius: float = 2.0, center=None):
        """Points ``exp_c(r u)`` with ``u`` uniform on the unit sphere and ``r``
        distributed like the radius of a uniform point in the tangent ball."""
        c = self.origin() if center is None else np.asarray(center, dtype=float)
        u = self.random_unit_tangent(c, rng, n)
        m = 1 if n is None else n
        r = radius * rng.random(m) ** (1.0 / self.dim)
        if n is None:
            return self.exp(c, r[0] * u)
        return self.exp(c, r.reshape((m,) + (1,) * self.point_ndim) * u)
