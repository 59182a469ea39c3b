"""Catalog of functions whose conjugates the library computes.

A :class:`FunctionSpec` is evaluable on batches of points and, through
:meth:`FunctionSpec.along`, on whole families of geodesics from a base point.
The latter is what conjugate searches call; it avoids forming far points in
ambient coordinates where the closed forms cancel catastrophically.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import Hyperbolic, Manifold, Product, SPD, minkowski
from .horoball import Ray, busemann

__all__ = ["HSpec", "FunctionSpec", "evaluate", "parse_hspec"]


@dataclass(frozen=True)
class HSpec:
    """Convex profile ``h: [0, inf) -> R`` with ``h(0) = 0``.

    kinds: ``quadratic`` (a t^2 / 2), ``power`` (t^q / q, q >= 1),
    ``linear`` (c t) and ``expm1`` (e^t - 1).
    """

    kind: str
    param: float = 1.0

    def __post_init__(self):
        if self.kind not in ("quadratic", "power", "linear", "expm1"):
            raise ValueError(f"unknown profile kind {self.kind!r}")
        if self.kind == "power" and not self.param >= 1.0:
            raise ValueError("power profile needs q >= 1")
        if self.kind in ("quadratic", "linear") and not self.param > 0.0:
            raise ValueError(f"{self.kind} profile needs a positive parameter")

    @classmethod
    def quadratic(cls, a: float = 1.0):
        return cls("quadratic", float(a))

    @classmethod
    def power(cls, q: float):
        return cls("power", float(q))

    @classmethod
    def linear(cls, c: float = 1.0):
        return cls("linear", float(c))

    @classmethod
    def expm1(cls):
        return cls("expm1", 1.0)

    @property
    def label(self) -> str:
        return self.kind if self.kind == "expm1" else f"{self.kind}:{self.param:g}"

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "quadratic":
            return 0.5 * self.param * t * t
        if self.kind == "power":
            return np.abs(t) ** self.param / self.param
        if self.kind == "linear":
            return self.param * t
        with np.errstate(over="ignore"):
            return np.expm1(t)

    def derivative(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "quadratic":
            return self.param * t
        if self.kind == "power":
            return np.abs(t) ** (self.param - 1.0)
        if self.kind == "linear":
            return np.full_like(t, self.param)
        return np.exp(t)

    @property
    def has_closed_conjugate(self) -> bool:
        return self.kind in ("quadratic", "power", "linear")

    def closed_conjugate(self, s):
        """``h*(s) = sup_{t >= 0} (s t - h(t))`` for ``s >= 0`` (may be +inf)."""
        s = np.asarray(s, dtype=float)
        if self.kind == "quadratic":
            return s * s / (2.0 * self.param)
        if self.kind == "power" and self.param > 1.0:
            qc = self.param / (self.param - 1.0)
            return s ** qc / qc
        if self.kind in ("linear", "power"):
            c = self.param if self.kind == "linear" else 1.0
            return np.where(s <= c, 0.0, np.inf)
        raise ValueError(f"no closed-form conjugate for {self.kind}")


def parse_hspec(text: str) -> HSpec:
    """``quadratic:A``, ``power:Q``, ``linear:C`` or ``expm1``."""
    kind, _, arg = text.partition(":")
    if kind == "expm1" and not arg:
        return HSpec.expm1()
    if kind not in ("quadratic", "power", "linear") or not arg:
        raise ValueError(f"bad profile {text!r}")
    return HSpec(kind, float(arg))


def _log_cosh_mix(tau, a, b):
    """``log(a cosh tau + b sinh tau)`` for ``tau >= 0`` and ``a + b >= 0``."""
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        e = np.exp(-2.0 * tau)
        inner = 0.5 * ((a + b) + (a - b) * e)
        return tau + np.log(inner)


@dataclass(frozen=True, eq=False)
class FunctionSpec:
    """A catalog function on a space.

    Build through the constructors :meth:`radial`, :meth:`busemann_of`,
    :meth:`half_dist_sq`, :meth:`logdet`, :meth:`gram` and :meth:`pullback`.
    """

    kind: str
    space: Manifold
    h: HSpec | None = None
    center: np.ndarray | None = None
    ray: Ray | None = None
    z: np.ndarray | None = None
    x: np.ndarray | None = None
    inner: "FunctionSpec | None" = None
    isometry: object = None
    label: str = field(default="")

    # -- constructors -----------------------------------------------------------
    @classmethod
    def radial(cls, h: HSpec, center, space: Manifold):
        center = space.check_point(center)
        return cls("radial", space, h=h, center=center, label=f"radial:{h.label}")

    @classmethod
    def half_dist_sq(cls, center, space: Manifold):
        center = space.check_point(center)
        return cls("radial", space, h=HSpec.quadratic(1.0), center=center, label="halfdistsq")

    @classmethod
    def busemann_of(cls, ray: Ray):
        return cls("busemann", ray.space, ray=ray, label="busemann")

    @classmethod
    def logdet(cls, space: Manifold):
        if not isinstance(space, SPD):
            raise ValueError("logdet is defined on SPD spaces only")
        return cls("logdet", space, label="logdet")

    @classmethod
    def gram(cls, z, x, space: Manifold):
        """``y -> <log_z x, log_z y>_z``."""
        z = space.check_point(z)
        x = space.check_point(x)
        return cls("gram", space, z=z, x=x, label="gram")

    @classmethod
    def pullback(cls, f: "FunctionSpec", isometry):
        """``f o I`` for an isometry representation ``I``."""
        return cls("pullback", f.space, inner=f, isometry=isometry, label=f"{f.label}oI")

    # -- evaluation -------------------------------------------------------------
    @property
    def is_radial(self) -> bool:
        return self.kind == "radial"

    def __call__(self, x) -> np.ndarray:
        return evaluate(self, x)

    def along(self, p, v, t) -> np.ndarray:
        """``f(exp_p(t v))`` for tangents ``v`` of shape ``(S, ...)`` at ``p``
        and radii ``t`` of shape ``(M,)``; returns ``(S, M)``.

        ``v`` need not be unit. Radial functions centred at ``p`` and
        hyperbolic (or product) Busemann functions use closed forms that stay
        accurate for large ``t``.
        """
        space = self.space
        p = np.asarray(p, dtype=float)
        v = np.asarray(v, dtype=float)
        t = np.asarray(t, dtype=float)
        speed = space.norm(p, v)  # (S,)
        if self.kind == "radial" and space.dist(p, self.center) == 0.0:
            return self.h(speed[:, None] * t[None, :])
        if self.kind == "busemann":
            out = _busemann_along(self.ray, p, v, t)
            if out is not None:
                return out
        if self.kind == "logdet":
            # ln det exp_P(tV) = ln det P + t tr(P^{-1} V)
            base = np.linalg.slogdet(p)[1]
            rate = np.einsum("ij,sji->s", np.linalg.inv(p), v)
            return base + rate[:, None] * t[None, :]
        if self.kind == "pullback":
            iso = self.isometry
            return self.inner.along(iso.apply(p), iso.differential(p, v), t)
        tv = t[None, :, None] * v.reshape(v.shape[0], 1, -1)
        tv = tv.reshape((v.shape[0], t.shape[0]) + space.point_shape)
        pts = space.exp(np.broadcast_to(p, tv.shape), tv)
        return evaluate(self, pts)


def _busemann_along(ray: Ray, p, v, t):
    """Stable ``B(exp_p(t v))``; ``None`` when no closed form applies."""
    space = ray.space
    if isinstance(space, Hyperbolic):
        k = space.k
        ideal = ray.base + ray.dir / k
        s = space.norm(p, v)  # (S,)
        live = s > 0
        su = np.where(live, s, 1.0)
        a = -k * k * minkowski(p, ideal)  # scalar
        b = -k * minkowski(v, ideal) / su  # (S,)
        tau = k * s[:, None] * t[None, :]
        val = _log_cosh_mix(tau, a, b[:, None]) / k
        return np.where(live[:, None], val, np.log(a) / k)
    if isinstance(space, Product):
        total = 0.0
        for m, pb, pd, pp, pv in zip(space.factors, space.split(ray.base), space.split(ray.dir),
                                     space.split(p), space.split(v)):
            w = m.norm(pb, pd)
            if w == 0.0:
                continue
            sub = FunctionSpec.busemann_of(Ray(m, pb, pd / w))
            total = total + w * sub.along(pp, pv, t)
        return total + np.zeros((v.shape[0], t.shape[0]))
    return None


def evaluate(f: FunctionSpec, x) -> np.ndarray:
    """Evaluate ``f`` on a point or a batch of points."""
    space = f.space
    x = np.asarray(x, dtype=float)
    space.batch_shape(x)
    if f.kind == "radial":
        return f.h(space.dist(x, f.center))
    if f.kind == "busemann":
        return busemann(f.ray, x)
    if f.kind == "logdet":
        return np.linalg.slogdet(x)[1]
    if f.kind == "gram":
        u = space.log(f.z, f.x)
        w = space.log(np.broadcast_to(f.z, x.shape), x)
        return space.inner(f.z, u, w)
    if f.kind == "pullback":
        return evaluate(f.inner, f.isometry.apply(x))
    raise ValueError(f"unknown function kind {f.kind!r}")
