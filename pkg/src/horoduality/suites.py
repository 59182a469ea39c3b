"""Named verification suites run by ``horoduality verify``.

Each suite builds a :class:`SuiteResult` of seeded cases. A case either
compares a measured value with an expected one (``|actual - expected| <=
tol``) or checks a property, recorded with ``expected = "property"`` and the
threshold in ``tol``. Cases adapt to the space: closed-form oracles where
they exist, sign and consistency properties elsewhere.
"""

from __future__ import annotations

import math
import time

import numpy as np

from .duality import conjugate, fenchel_young_audit, legendre_1d, nonlinearity, radial_conjugate
from .functions import FunctionSpec, HSpec
from .geometry import SPD, Euclidean, Hyperbolic, Manifold, Product, space_from_name
from .horoball import asymptote, asymptote_gap, busemann, busemann_numeric, h_kernel, make_ray
from .isometry import compose, random_isometry
from .report import SuiteResult
from .rigidity import affinity_report, gram_probe, splitting_check_spd, zero_ricci_direction
from .search import SearchBudget
from .subgradient import (is_subgradient, radial_subgradient, subgradient_from_equality,
                          witness_point)

__all__ = ["SUITES", "run_suite", "nonlinearity_oracle"]

SPACES = ("e2", "e3", "h2", "h3", "spd2", "spd3", "h2xr")


def nonlinearity_oracle(d: float, k: float = 1.0) -> float:
    """``N^p(y) = -(d/k) ln cosh(k d / 2)`` on ``H^n_k`` at ``d = d(y, p)``."""
    return -(d / k) * math.log(math.cosh(k * d / 2.0))


class _Cases:
    def __init__(self, result: SuiteResult, prefix: str = ""):
        self.result = result
        self.prefix = prefix

    def value(self, name, expected, actual, tol, witness=None):
        ok = bool(np.isfinite(actual) and abs(actual - expected) <= tol)
        self.result.add(self.prefix + name, expected, actual, tol, ok, witness)

    def at_most(self, name, actual, limit, witness=None):
        self.result.add(self.prefix + name, "property", actual, limit, bool(actual <= limit), witness)

    def below(self, name, actual, limit, witness=None):
        self.result.add(self.prefix + name, "property", actual, limit, bool(actual < limit), witness)

    def at_least(self, name, actual, limit, witness=None):
        self.result.add(self.prefix + name, "property", actual, limit, bool(actual >= limit), witness)


def _unit_point(space: Manifold, d: float = 1.0, index: int = 0):
    """``exp_o(d e_index)`` at the origin."""
    o = space.origin()
    return space.exp(o, d * space.tangent_basis(o)[index])


def _has_closed_busemann(space: Manifold) -> bool:
    if isinstance(space, Product):
        return all(_has_closed_busemann(m) for m in space.factors)
    return isinstance(space, (Euclidean, Hyperbolic))


# -- geometry -------------------------------------------------------------------
def geometry_suite(space: Manifold, seed: int, c: _Cases):
    rng = np.random.default_rng(seed)
    o = space.origin()
    xs = space.random_point(rng, 50, radius=3.0)
    ys = space.random_point(rng, 50, radius=3.0)
    back = space.exp(xs, space.log(xs, ys))
    c.at_most("exp_log_roundtrip", float(np.max(space.dist(back, ys))), 1e-9)
    gap = np.abs(space.norm(xs, space.log(xs, ys)) - space.dist(xs, ys))
    c.at_most("log_norm_is_dist", float(np.max(gap)), 1e-9)
    sym = np.abs(space.dist(xs, ys) - space.dist(ys, xs))
    c.at_most("dist_symmetric", float(np.max(sym)), 1e-12)

    basis = space.tangent_basis(xs[0])
    gram = np.array([[float(space.inner(xs[0], u, v)) for v in basis] for u in basis])
    c.at_most("tangent_basis_orthonormal", float(np.max(np.abs(gram - np.eye(space.dim)))), 1e-10)

    worst = -np.inf
    for x in xs[:10]:
        u = space.random_unit_tangent(x, rng)
        v = space.random_unit_tangent(x, rng)
        worst = max(worst, float(space.sectional(x, u, v)))
    c.at_most("sectional_nonpositive", worst, 1e-12)

    # distance oracle and sectional curvature oracle
    if isinstance(space, Euclidean):
        q = np.zeros(space.dim)
        q[:2] = (3.0, 4.0)
        c.value("dist_oracle", 5.0, float(space.dist(o, q)), 1e-12)
        b = space.tangent_basis(o)
        c.value("sectional_oracle", 0.0, float(space.sectional(o, b[0], b[1])), 1e-12)
    elif isinstance(space, Hyperbolic):
        k = space.k
        q = np.zeros(space.dim + 1)
        q[0], q[-1] = math.sinh(1.5 * k) / k, math.cosh(1.5 * k) / k
        c.value("dist_oracle", 1.5, float(space.dist(o, q)), 1e-12)
        b = space.tangent_basis(o)
        c.value("sectional_oracle", -k * k, float(space.sectional(o, b[0], b[1])), 1e-10)
    elif isinstance(space, SPD):
        q = np.eye(space.n)
        q[0, 0] = math.e
        c.value("dist_oracle", 1.0, float(space.dist(o, q)), 1e-12)
        U = np.zeros((space.n, space.n))
        U[0, 0], U[1, 1] = 1 / math.sqrt(2), -1 / math.sqrt(2)
        V = np.zeros((space.n, space.n))
        V[0, 1] = V[1, 0] = 1 / math.sqrt(2)
        c.value("sectional_oracle", -0.5, float(space.sectional(o, U, V)), 1e-10)
    elif isinstance(space, Product):
        h = _unit_point(space.factors[0], 1.5)
        e = np.array([2.0])
        c.value("dist_oracle", 2.5, float(space.dist(o, space.join(h, e))), 1e-12)
        b = space.tangent_basis(o)
        c.value("sectional_oracle", -1.0, float(space.sectional(o, b[0], b[1])), 1e-10)
        c.value("sectional_mixed_plane", 0.0, float(space.sectional(o, b[0], b[-1])), 1e-12)


# -- horoball -------------------------------------------------------------------
def horoball_suite(space: Manifold, seed: int, c: _Cases):
    rng = np.random.default_rng(seed)
    o = space.origin()
    ray = make_ray(space, o, space.random_unit_tangent(o, rng))
    closed = _has_closed_busemann(space)
    tol = 1e-9 if closed else 1e-6
    c.value("busemann_at_base", 0.0, float(busemann(ray, o)), tol)
    c.value("busemann_along_ray", -3.0, float(busemann(ray, ray.point(3.0))), tol)

    n = 50 if closed else 20
    xs = space.random_point(rng, n, radius=3.0)
    ys = space.random_point(rng, n, radius=3.0)
    bx, by = busemann(ray, xs), busemann(ray, ys)
    excess = np.abs(bx - by) - space.dist(xs, ys)
    c.at_most("busemann_lipschitz", float(np.max(excess)), tol)

    if closed:
        diff = np.abs(bx - busemann_numeric(ray, xs))
        c.at_most("closed_vs_numeric", float(np.max(diff)), 1e-6)

    q = space.random_point(rng, radius=2.0)
    out = asymptote(q, ray)
    excess = asymptote_gap(ray, out) - float(space.dist(q, ray.base))
    c.at_most("asymptote_gap", excess, 1e-3)

    z, y = xs[: n // 2], ys[: n // 2]
    kern = h_kernel(space, o, z, y)
    excess = np.abs(kern) - space.dist(z, o) * space.dist(y, o)
    c.at_most("h_kernel_bound", float(np.max(excess)), 1e-9 if closed else 1e-6)
    if isinstance(space, Euclidean):
        z0 = np.zeros(space.dim)
        z0[:2] = (1.0, 2.0)
        y0 = np.zeros(space.dim)
        y0[:2] = (3.0, 4.0)
        c.value("h_kernel_euclid", 11.0, float(h_kernel(space, o, z0, y0)), 1e-12)
        err = np.abs(kern - np.sum(z * y, axis=-1))
        c.at_most("h_kernel_is_inner_product", float(np.max(err)), 1e-12)


# -- duality --------------------------------------------------------------------
def duality_suite(space: Manifold, seed: int, c: _Cases):
    rng = np.random.default_rng(seed)
    o = space.origin()
    budget = SearchBudget()
    c.value("legendre_quadratic", 2.0, float(legendre_1d(HSpec.quadratic(1.0), 2.0)), 1e-12)
    # sup_t (s t - e^t + 1) = s ln s - s + 1
    c.value("legendre_expm1", 2.0 * math.log(2.0) - 1.0,
            float(legendre_1d(HSpec.expm1(), 2.0)), 1e-6)

    n = 3 if isinstance(space, SPD) else 8
    xs = space.random_point(rng, n, radius=2.0)
    for kind, h in (("quadratic", HSpec.quadratic(1.0)), ("power3", HSpec.power(3.0))):
        f = FunctionSpec.radial(h, o, space)
        diff = 0.0
        for x in xs:
            val, _ = conjugate(f, o, x, budget, seed=seed)
            diff = max(diff, abs(val.value - radial_conjugate(h, o, x, space).value))
        c.value(f"radial_reduction_{kind}", 0.0, diff, 1e-3)

    f = FunctionSpec.half_dist_sq(o, space)
    if not isinstance(space, SPD):
        gap = 0.0
        for x in xs:
            val, _ = conjugate(f, o, x, budget, seed=seed)
            gap = max(gap, abs(val.value - float(f(x))))
        c.value("self_conjugacy_halfdistsq", 0.0, gap, 1e-3)

    rep = fenchel_young_audit(f, o, n_samples=25, seed=seed)
    c.at_least("fenchel_young_min_slack", rep.metrics["min_slack"], -budget.tol)

    y = _unit_point(space, 1.0)
    val = nonlinearity(space, o, y, budget, seed=seed)
    if isinstance(space, Euclidean):
        c.value("nonlinearity_unit_distance", 0.0, val, 1e-9)
    elif isinstance(space, Hyperbolic):
        c.value("nonlinearity_unit_distance", nonlinearity_oracle(1.0, space.k), val, 2e-3)
    else:
        c.at_most("nonlinearity_unit_distance", val, 0.0)


# -- subgradient ----------------------------------------------------------------
def subgradient_suite(space: Manifold, seed: int, c: _Cases):
    rng = np.random.default_rng(seed)
    o = space.origin()
    f = FunctionSpec.half_dist_sq(o, space)
    budget = SearchBudget(n_samples=300, tol=1e-6)
    x = space.random_point(rng, radius=1.5)
    v = radial_subgradient(f.h, o, x, space)
    rep = is_subgradient(f, o, x, v, budget, seed=seed)
    c.value("gradient_equality_residual", 0.0, rep.metrics["equality_residual"], 1e-6)
    c.at_least("gradient_min_slack", rep.metrics["min_slack"], -budget.tol)
    rep2 = is_subgradient(f, o, x, 2.0 * v, budget, seed=seed)
    c.below("scaled_gradient_violation", rep2.metrics["min_slack"], -1e-3)

    w = witness_point(space, o, x, v)
    back = subgradient_from_equality(f, o, x, w.y)
    err = float(space.norm(x, back - v))
    c.at_most("witness_roundtrip", err, 1e-9 if _has_closed_busemann(space) else 1e-4)
    if isinstance(space, Euclidean):
        worst = 0.0
        for _ in range(20):
            p = rng.standard_normal(space.dim)
            xe = rng.standard_normal(space.dim)
            ve = rng.standard_normal(space.dim)
            worst = max(worst, float(np.max(np.abs(witness_point(space, p, xe, ve).y - (p + ve)))))
        c.at_most("witness_is_p_plus_v", worst, 1e-12)


# -- rigidity -------------------------------------------------------------------
def rigidity_suite(space: Manifold, seed: int, c: _Cases):
    rng = np.random.default_rng(seed)
    o = space.origin()
    budget = SearchBudget(tol=1e-12)
    val, v = zero_ricci_direction(space, o, budget, seed=seed)
    if isinstance(space, Hyperbolic):
        c.value("zero_ricci_min", space.k ** 2, val, 1e-9)
    else:
        c.value("zero_ricci_min", 0.0, val, 1e-10)

    if isinstance(space, Euclidean):
        z, x = o, _unit_point(space, 1.0)
        rep = gram_probe(space, z, x, n_geodesics=100, seed=seed)
        c.at_most("gram_linear", rep.metrics["max_abs_second_difference"], 1e-10)
        ray = make_ray(space, o, space.random_unit_tangent(o, rng))
        aff = affinity_report(FunctionSpec.busemann_of(ray), space, n_geodesics=50, seed=seed)
        c.at_most("busemann_affine", aff.max_second_difference, 1e-10)
    elif isinstance(space, Hyperbolic):
        rep = gram_probe(space, o, _unit_point(space, 1.0), n_geodesics=200, seed=seed)
        c.below("gram_nonconvex_witness", rep.metrics["min_second_difference"], -1e-3)
        ray = make_ray(space, o, space.random_unit_tangent(o, rng))
        aff = affinity_report(FunctionSpec.busemann_of(ray), space, n_geodesics=20, seed=seed)
        c.at_least("busemann_not_affine", aff.max_second_difference, 1e-6)
    elif isinstance(space, SPD):
        n = space.n
        X = space.random_point(rng, radius=1.0)
        ric = space.ricci_dir(X, X / math.sqrt(n))
        c.value("ricci_identity_direction", 0.0, float(ric), 1e-10)
        aff = affinity_report(FunctionSpec.logdet(space), space, n_geodesics=100, seed=seed)
        c.at_most("logdet_second_difference", aff.max_second_difference, 1e-8)
        c.value("logdet_gradient_norm", math.sqrt(n), aff.gradient_norm_mean, 1e-6)
        Xs = space.random_point(rng, 20, radius=2.0)
        Ys = space.random_point(rng, 20, radius=2.0)
        c.at_most("splitting_residual", float(np.max(splitting_check_spd(Xs, Ys))), 1e-8)
    elif isinstance(space, Product):
        line = space.join(np.zeros(space.factors[0].size), np.ones(1))
        cosang = min(1.0, abs(float(space.inner(o, v, line))))
        c.at_most("zero_ricci_angle_to_line", math.acos(cosang), 1e-3)
        ray = make_ray(space, o, line)
        aff = affinity_report(FunctionSpec.busemann_of(ray), space, n_geodesics=50, seed=seed)
        c.at_most("line_busemann_affine", aff.max_second_difference, 1e-10)


# -- isometry -------------------------------------------------------------------
def isometry_suite(space: Manifold, seed: int, c: _Cases):
    rng = np.random.default_rng(seed)
    o = space.origin()
    dist_err = inv_err = norm_err = chain_err = exact_err = 0.0
    h = HSpec.quadratic(1.0)
    for j in range(5):
        iso = random_isometry(space, seed + j)
        jso = random_isometry(space, seed + 100 + j)
        xs = space.random_point(rng, 20, radius=2.0)
        ys = space.random_point(rng, 20, radius=2.0)
        dist_err = max(dist_err, float(np.max(np.abs(
            space.dist(iso(xs), iso(ys)) - space.dist(xs, ys)))))
        inv_err = max(inv_err, float(np.max(space.dist(iso.inverse()(iso(xs)), xs))))
        b = xs[0]
        u = space.random_unit_tangent(b, rng)
        norm_err = max(norm_err, abs(float(space.norm(iso(b), iso.differential(b, u))) - 1.0))
        lhs = compose(iso, jso).differential(b, u)
        rhs = iso.differential(jso(b), jso.differential(b, u))
        chain_err = max(chain_err, float(np.max(np.abs(lhs - rhs))))
        q = iso.inverse()(o)
        for x in xs[:5]:
            a = radial_conjugate(h, o, iso(x), space).value
            e = radial_conjugate(h, q, x, space).value
            exact_err = max(exact_err, abs(a - e))
    c.at_most("distance_preserved", dist_err, 1e-10)
    c.at_most("inverse_roundtrip", inv_err, 1e-9)
    c.at_most("differential_norm_preserved", norm_err, 1e-10)
    c.at_most("chain_rule", chain_err, 1e-10)
    c.at_most("conjugate_law_exact", exact_err, 1e-8)

    iso = random_isometry(space, seed)
    q = iso.inverse()(o)
    f = FunctionSpec.radial(h, o, space)
    g = FunctionSpec.pullback(f, iso)
    sup_err = 0.0
    for x in space.random_point(rng, 3, radius=2.0, center=q):
        a, _ = conjugate(f, o, iso(x), seed=seed, probe=False)
        b, _ = conjugate(g, q, x, seed=seed, probe=False)
        sup_err = max(sup_err, abs(a.value - b.value))
    c.at_most("conjugate_law_sup", sup_err, 2e-3)


SUITES = {
    "geometry": geometry_suite,
    "horoball": horoball_suite,
    "duality": duality_suite,
    "subgradient": subgradient_suite,
    "rigidity": rigidity_suite,
    "isometry": isometry_suite,
}


def run_suite(space_name: str, suite: str, seed: int) -> SuiteResult:
    """Run one suite (or ``"all"``, with case names prefixed by the suite)
    on a named space; cases come back ordered by name."""
    space = space_from_name(space_name)
    if suite != "all" and suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}; choose from {sorted(SUITES) + ['all']}")
    result = SuiteResult(suite, space_name.lower(), int(seed))
    start = time.perf_counter()
    names = sorted(SUITES) if suite == "all" else [suite]
    for name in names:
        prefix = f"{name}/" if suite == "all" else ""
        SUITES[name](space, int(seed), _Cases(result, prefix))
    result.runtime_ms = 1e3 * (time.perf_counter() - start)
    return result.ordered()
