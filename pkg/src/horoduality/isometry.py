"""Isometries represented by matrices, with their differentials.

Every representation maps points with :meth:`apply` and tangents with
:meth:`differential`; both broadcast over leading batch axes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import ortho_group, special_ortho_group

from .geometry import SPD, Euclidean, Hyperbolic, Manifold, Product, SpaceMismatch, minkowski

__all__ = [
    "Isometry",
    "EuclideanRigid",
    "LorentzMap",
    "SPDCongruence",
    "SPDInverse",
    "ProductPair",
    "Composite",
    "identity",
    "apply",
    "differential",
    "inverse",
    "compose",
    "random_isometry",
]

MATRIX_TOL = 1e-10
RENORMALIZE_LIMIT = 1e-6


class Isometry:
    space: Manifold

    def apply(self, x) -> np.ndarray:
        raise NotImplementedError

    def differential(self, b, u) -> np.ndarray:
        raise NotImplementedError

    def inverse(self) -> "Isometry":
        raise NotImplementedError

    def __call__(self, x):
        return self.apply(x)


@dataclass(frozen=True, eq=False)
class EuclideanRigid(Isometry):
    """``x -> Q x + b`` with ``Q`` orthogonal."""

    space: Euclidean
    Q: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        Q = np.asarray(self.Q, dtype=float)
        n = self.space.dim
        if Q.shape != (n, n):
            raise SpaceMismatch(f"Q must be {n}x{n}")
        drift = np.max(np.abs(Q.T @ Q - np.eye(n)))
        if drift > MATRIX_TOL:
            raise ValueError(f"Q is not orthogonal (drift {drift:.3g})")
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "b", np.asarray(self.b, dtype=float).reshape(n))

    def apply(self, x):
        x = np.asarray(x, dtype=float)
        self.space.batch_shape(x)
        return x @ self.Q.T + self.b

    def differential(self, b, u):
        return np.asarray(u, dtype=float) @ self.Q.T

    def inverse(self):
        return EuclideanRigid(self.space, self.Q.T, -self.Q.T @ self.b)


def _lorentz_drift(A):
    J = np.diag([1.0] * (len(A) - 1) + [-1.0])
    return float(np.max(np.abs(A.T @ J @ A - J)))


def _lorentz_gram_schmidt(A):
    """Re-orthonormalize the columns of ``A`` under the Minkowski form, time
    column first."""
    cols = [A[:, -1] / np.sqrt(-minkowski(A[:, -1], A[:, -1]))]
    if cols[0][-1] < 0:
        cols[0] = -cols[0]
    for j in range(len(A) - 1):
        c = A[:, j].copy()
        for e in cols:
            sign = -1.0 if e is cols[0] else 1.0
            c = c - sign * minkowski(c, e) * e
        cols.append(c / np.sqrt(minkowski(c, c)))
    return np.column_stack(cols[1:] + cols[:1])


@dataclass(frozen=True, eq=False)
class LorentzMap(Isometry):
    """``x -> A x`` with ``A^T J A = J`` preserving the upper sheet."""

    space: Hyperbolic
    A: np.ndarray

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        n = self.space.dim + 1
        if A.shape != (n, n):
            raise SpaceMismatch(f"A must be {n}x{n}")
        drift = _lorentz_drift(A)
        if drift > RENORMALIZE_LIMIT:
            raise ValueError(f"A is not a Lorentz matrix (drift {drift:.3g})")
        if drift > MATRIX_TOL:
            # rounding drift only; larger defects are errors, not noise
            A = _lorentz_gram_schmidt(A)
        if A[-1, -1] <= 0:
            raise ValueError("A swaps the sheets of the hyperboloid")
        object.__setattr__(self, "A", A)

    @classmethod
    def boost(cls, space: Hyperbolic, rapidity: float, axis: int = 0):
        n = space.dim + 1
        A = np.eye(n)
        c, s = np.cosh(rapidity), np.sinh(rapidity)
        A[axis, axis] = A[-1, -1] = c
        A[axis, -1] = A[-1, axis] = s
        return cls(space, A)

    @classmethod
    def rotation(cls, space: Hyperbolic, R):
        n = space.dim + 1
        A = np.eye(n)
        A[:-1, :-1] = R
        return cls(space, A)

    def apply(self, x):
        x = np.asarray(x, dtype=float)
        self.space.batch_shape(x)
        return self.space.check_point(x @ self.A.T, tol=1e-8)

    def differential(self, b, u):
        return np.asarray(u, dtype=float) @ self.A.T

    def inverse(self):
        J = np.diag([1.0] * self.space.dim + [-1.0])
        return LorentzMap(self.space, J @ self.A.T @ J)


@dataclass(frozen=True, eq=False)
class SPDCongruence(Isometry):
    """``X -> A X A^T`` for invertible ``A``."""

    space: SPD
    A: np.ndarray

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        n = self.space.n
        if A.shape != (n, n):
            raise SpaceMismatch(f"A must be {n}x{n}")
        if not np.linalg.cond(A) < 1e8:
            raise ValueError("A is singular or too ill-conditioned")
        object.__setattr__(self, "A", A)

    def apply(self, x):
        x = np.asarray(x, dtype=float)
        self.space.batch_shape(x)
        y = self.A @ x @ self.A.T
        return self.space.check_point(0.5 * (y + np.swapaxes(y, -1, -2)), tol=1e-8)

    def differential(self, b, u):
        return self.A @ np.asarray(u, dtype=float) @ self.A.T

    def inverse(self):
        return SPDCongruence(self.space, np.linalg.inv(self.A))


@dataclass(frozen=True, eq=False)
class SPDInverse(Isometry):
    """``X -> X^{-1}``, with differential ``U -> -X^{-1} U X^{-1}``."""

    space: SPD

    def apply(self, x):
        x = np.asarray(x, dtype=float)
        self.space.batch_shape(x)
        y = np.linalg.inv(x)
        return self.space.check_point(0.5 * (y + np.swapaxes(y, -1, -2)), tol=1e-8)

    def differential(self, b, u):
        bi = np.linalg.inv(np.asarray(b, dtype=float))
        return -bi @ np.asarray(u, dtype=float) @ bi

    def inverse(self):
        return self


@dataclass(frozen=True, eq=False)
class ProductPair(Isometry):
    """Factor-wise isometry of a product space."""

    space: Product
    first: Isometry
    second: Isometry

    def apply(self, x):
        x1, x2 = self.space.split(np.asarray(x, dtype=float))
        return self.space.join(self.first.apply(x1), self.second.apply(x2))

    def differential(self, b, u):
        b1, b2 = self.space.split(np.asarray(b, dtype=float))
        u1, u2 = self.space.split(np.asarray(u, dtype=float))
        return self.space.join(self.first.differential(b1, u1), self.second.differential(b2, u2))

    def inverse(self):
        return ProductPair(self.space, self.first.inverse(), self.second.inverse())


@dataclass(frozen=True, eq=False)
class Composite(Isometry):
    """``parts[0] o parts[1] o ...``; application runs right to left."""

    space: Manifold
    parts: tuple

    def apply(self, x):
        for iso in reversed(self.parts):
            x = iso.apply(x)
        return x

    def differential(self, b, u):
        for iso in reversed(self.parts):
            u = iso.differential(b, u)
            b = iso.apply(b)
        return u

    def inverse(self):
        return Composite(self.space, tuple(iso.inverse() for iso in reversed(self.parts)))


def identity(space: Manifold) -> Isometry:
    if isinstance(space, Euclidean):
        return EuclideanRigid(space, np.eye(space.dim), np.zeros(space.dim))
    if isinstance(space, Hyperbolic):
        return LorentzMap(space, np.eye(space.dim + 1))
    if isinstance(space, SPD):
        return SPDCongruence(space, np.eye(space.n))
    if isinstance(space, Product):
        return ProductPair(space, *(identity(m) for m in space.factors))
    raise TypeError(f"no isometries for {type(space).__name__}")


def apply(iso: Isometry, x):
    return iso.apply(x)


def differential(iso: Isometry, b, u):
    return iso.differential(b, u)


def inverse(iso: Isometry) -> Isometry:
    return iso.inverse()


def compose(first: Isometry, second: Isometry) -> Isometry:
    """``first o second``; matrix representations of the same kind merge."""
    if first.space is not second.space and first.space.name != second.space.name:
        raise SpaceMismatch("isometries act on different spaces")
    if isinstance(first, EuclideanRigid) and isinstance(second, EuclideanRigid):
        return EuclideanRigid(first.space, first.Q @ second.Q, first.Q @ second.b + first.b)
    if isinstance(first, LorentzMap) and isinstance(second, LorentzMap):
        return LorentzMap(first.space, first.A @ second.A)
    if isinstance(first, SPDCongruence) and isinstance(second, SPDCongruence):
        return SPDCongruence(first.space, first.A @ second.A)
    return Composite(first.space, (first, second))


def random_isometry(space: Manifold, seed: int = 0) -> Isometry:
    """Seeded draw: rigid motions on Euclidean space, a rotation composed with
    a boost of rapidity in ``[0, 2]`` on hyperbolic space, a congruence with
    condition number at most 10 on SPD, factor-wise on products."""
    rng = np.random.default_rng(seed)
    return _draw(space, rng)


def _rotation(n, rng):
    if n == 1:
        return np.array([[rng.choice([-1.0, 1.0])]])
    return special_ortho_group.rvs(n, random_state=rng)


def _draw(space, rng):
    if isinstance(space, Euclidean):
        return EuclideanRigid(space, _rotation(space.dim, rng), rng.standard_normal(space.dim))
    if isinstance(space, Hyperbolic):
        rot = LorentzMap.rotation(space, _rotation(space.dim, rng))
        boost = LorentzMap.boost(space, rng.uniform(0.0, 2.0))
        return LorentzMap(space, rot.A @ boost.A)
    if isinstance(space, SPD):
        n = space.n
        s = np.exp(rng.uniform(0.0, np.log(10.0), n))
        s = s / s.min() * np.exp(rng.uniform(-0.5, 0.5))
        U = ortho_group.rvs(n, random_state=rng) if n > 1 else np.eye(1)
        V = ortho_group.rvs(n, random_state=rng) if n > 1 else np.eye(1)
        return SPDCongruence(space, U @ np.diag(s) @ V.T)
    if isinstance(space, Product):
        return ProductPair(space, *(_draw(m, rng) for m in space.factors))
    raise TypeError(f"no isometries for {type(space).__name__}")
