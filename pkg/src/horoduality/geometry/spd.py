r"""SPD(n) with the affine-invariant metric ``<U, V>_X = tr(V X^{-1} U X^{-1})``.

Points and tangents are ``(n, n)`` symmetric matrices. All matrix functions
go through :func:`~.linalg.jacobi_eigh`.
"""

from __future__ import annotations

import numpy as np

from .base import InvalidPoint, InvalidTangent, Manifold
from .linalg import jacobi_eigh, sqrt_and_inv_sqrt, sym, sym_fn

__all__ = ["SPD"]


def _t(a):
    return np.swapaxes(a, -1, -2)


class SPD(Manifold):
    kind = "SPD"
    # largest t * (w_max - w_min) for which far-ray distances are trusted
    GRADED_RANGE = 20000.0

    def __init__(self, n: int):
        if n < 1:
            raise ValueError("matrix order must be positive")
        self.n = int(n)
        self.dim = self.n * (self.n + 1) // 2
        self.point_shape = (self.n, self.n)
        # sectional curvature lies in [-1/2, 0]; no strictly negative upper bound
        self.curvature_bounds = None

    @property
    def name(self) -> str:
        return f"SPD{self.n}"

    def __eq__(self, other):
        return isinstance(other, SPD) and other.n == self.n

    def __hash__(self):
        return hash((self.kind, self.n))

    def origin(self):
        return np.eye(self.n)

    def check_point(self, x, tol: float = 1e-12):
        x = super().check_point(x)
        scale = np.maximum(1.0, np.max(np.abs(x), axis=(-1, -2)))
        if np.any(np.max(np.abs(x - _t(x)), axis=(-1, -2)) > tol * scale):
            raise InvalidPoint("matrix is not symmetric")
        w, _ = jacobi_eigh(x)
        if np.any(w[..., 0] <= 0.0):
            raise InvalidPoint("matrix is not positive definite")
        return x

    def check_tangent(self, p, v, tol: float = 1e-12):
        v = super().check_tangent(p, v)
        scale = np.maximum(1.0, np.max(np.abs(v), axis=(-1, -2)))
        if np.any(np.max(np.abs(v - _t(v)), axis=(-1, -2)) > tol * scale):
            raise InvalidTangent("tangent matrix is not symmetric")
        return v

    def project_tangent(self, p, v):
        return sym(np.asarray(v, dtype=float))

    # -- geometry ---------------------------------------------------------------
    def dist(self, x, y):
        x, y = self._bcast(x, y)
        _, xi = sqrt_and_inv_sqrt(x)
        w, _ = jacobi_eigh(xi @ y @ xi)
        return np.sqrt(np.sum(np.log(w) ** 2, axis=-1))

    def exp(self, p, v):
        p, v = self._bcast(p, v)
        ps, pi = sqrt_and_inv_sqrt(p)
        return sym(ps @ sym_fn(pi @ sym(v) @ pi, np.exp) @ ps)

    def log(self, p, q):
        p, q = self._bcast(p, q)
        ps, pi = sqrt_and_inv_sqrt(p)
        v = sym(ps @ sym_fn(pi @ q @ pi, np.log) @ ps)
        same = np.all(p == q, axis=(-2, -1))
        return np.where(same[..., None, None], 0.0, v)

    def inner(self, p, u, v):
        p, u, v = self._bcast(p, u, v)
        pinv = np.linalg.inv(p)
        return np.einsum("...ij,...ji->...", pinv @ u, pinv @ v)

    def tangent_basis(self, p):
        ps, _ = sqrt_and_inv_sqrt(np.asarray(p, dtype=float))
        basis = []
        for i in range(self.n):
            e = np.zeros((self.n, self.n))
            e[i, i] = 1.0
            basis.append(e)
        for i in range(self.n):
            for j in range(i + 1, self.n):
                e = np.zeros((self.n, self.n))
                e[i, j] = e[j, i] = 1.0 / np.sqrt(2.0)
                basis.append(e)
        return np.array([sym(ps @ e @ ps) for e in basis])

    def curvature_form(self, p, u, v):
        # transport to the identity by congruence, where R(U,V)W = -1/4 [[U,V],W]
        p, u, v = self._bcast(p, u, v)
        _, pi = sqrt_and_inv_sqrt(p)
        a = pi @ u @ pi
        b = pi @ v @ pi
        c = a @ b - b @ a
        return -0.25 * np.sum(c * c, axis=(-1, -2))

    def ray_distance(self, base, direction, x, t):
        """Distance from ``x`` to ``exp_base(t * direction)`` for large ``t``.

        Congruence by ``Q^T base^{-1/2}`` (``Q`` diagonalizing the transported
        direction) turns the far point into ``diag(exp(t w))``; the distance is
        then read off the eigenvalues of the graded matrix ``E X' E``, which
        Jacobi resolves to relative accuracy.
        """
        base, direction, x = self._bcast(base, direction, x)
        t = np.asarray(t, dtype=float)
        _, bi = sqrt_and_inv_sqrt(base)
        w, q = jacobi_eigh(bi @ direction @ bi)
        xp = _t(q) @ bi @ x @ bi @ q
        # centre the exponents and work in extended precision: the graded
        # entries span exp(+-t * span / 2), far outside double range for long rays
        ld = np.longdouble
        mid = 0.5 * (w[..., :1] + w[..., -1:])
        tt = t.astype(ld)[..., None]
        scale = np.exp(-0.5 * tt * (w.astype(ld) - mid))
        graded = scale[..., :, None] * xp.astype(ld) * scale[..., None, :]
        lam, _ = jacobi_eigh(graded)
        loglam = np.log(lam) - tt * mid
        d = np.sqrt(np.sum(loglam ** 2, axis=-1)).astype(float)
        # past this exponent range even extended precision under/overflows
        span = w[..., -1] - w[..., 0]
        return np.where(t * span <= self.GRADED_RANGE, d, np.nan)
