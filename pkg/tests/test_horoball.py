import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from horoduality.geometry import SPD, Euclidean, Hyperbolic, space_from_name
from horoduality.horoball import (Ray, asymptote, asymptote_gap, busemann, busemann_numeric,
                                  h_kernel, make_ray)
from horoduality.search import SearchBudget, fd_gradient

H2 = Hyperbolic(2)
O = np.array([0.0, 0.0, 1.0])
E1 = np.array([1.0, 0.0, 0.0])
CLOSED = ["e2", "h2", "h3", "h2xr"]


def _ray(space, rng):
    p = space.random_point(rng, radius=1.0)
    return make_ray(space, p, space.random_unit_tangent(p, rng))


# -- rays -----------------------------------------------------------------------
def test_make_ray_normalizes():
    np.testing.assert_allclose(make_ray(Euclidean(2), np.zeros(2), np.array([2.0, 0.0])).dir, [1, 0])
    np.testing.assert_allclose(make_ray(H2, O, np.array([3.0, 0.0, 0.0])).dir, E1)
    r = make_ray(SPD(2), np.eye(2), 2 * np.eye(2))
    np.testing.assert_allclose(r.dir, np.eye(2) / math.sqrt(2), atol=1e-15)


def test_make_ray_rejects_zero():
    with pytest.raises(ValueError):
        make_ray(H2, O, np.zeros(3))


# -- closed forms -------------------------------------------------------------------
def test_busemann_h2_value():
    x = np.array([0.0, math.sinh(1), math.cosh(1)])
    val = busemann(Ray(H2, O, E1), x)
    assert val == pytest.approx(math.log(math.cosh(1)), abs=1e-12)
    assert val == pytest.approx(0.4338, abs=1e-4)


def test_busemann_euclidean_value():
    r = Ray(Euclidean(2), np.zeros(2), np.array([1.0, 0.0]))
    assert busemann(r, np.array([3.0, 4.0])) == pytest.approx(-3.0)


def test_busemann_at_base_is_zero(space, rng):
    r = _ray(space, rng)
    assert abs(busemann(r, r.base)) <= 1e-9


def test_busemann_numeric_matches_closed_form():
    x = np.array([0.0, math.sinh(1), math.cosh(1)])
    val = busemann_numeric(Ray(H2, O, E1), x, SearchBudget(t_max=20, tol=1e-6))
    assert val == pytest.approx(math.log(math.cosh(1)), abs=1e-6)


def test_busemann_numeric_on_ray():
    r = Ray(H2, O, E1)
    assert busemann_numeric(r, r.point(2.0), SearchBudget(t_max=20, tol=1e-6)) == pytest.approx(-2, abs=1e-6)


def test_busemann_numeric_spd_base():
    r = make_ray(SPD(2), np.eye(2), np.diag([1.0, 0.0]))
    assert abs(busemann_numeric(r, np.eye(2))) <= 1e-6


@pytest.mark.parametrize("name", CLOSED)
def test_closed_form_matches_numeric_limit(name):
    space = space_from_name(name)
    rng = np.random.default_rng(3)
    r = _ray(space, rng)
    x = space.random_point(rng, 100, radius=3.0)
    assert np.max(np.abs(busemann(r, x) - busemann_numeric(r, x))) <= 1e-6


def test_busemann_numeric_sequence_is_monotone_on_spd():
    S = SPD(3)
    rng = np.random.default_rng(0)
    r = _ray(S, rng)
    x = S.random_point(rng)
    raw = [float(S.ray_distance(r.base, r.dir, x, T) - T) for T in (4, 8, 16, 32, 64)]
    assert all(b <= a + 1e-9 for a, b in zip(raw, raw[1:]))


# -- invariants -----------------------------------------------------------------
def test_busemann_lipschitz(space):
    rng = np.random.default_rng(5)
    n = 1000
    r = _ray(space, rng)
    x = space.random_point(rng, n, radius=3.0)
    y = space.random_point(rng, n, radius=3.0)
    excess = np.abs(busemann(r, x) - busemann(r, y)) - space.dist(x, y)
    assert np.max(excess) <= 1e-9


@pytest.mark.parametrize("t", np.linspace(-3, 3, 7))
def test_busemann_along_ray_is_minus_t(space, t):
    r = _ray(space, np.random.default_rng(2))
    assert busemann(r, r.point(t)) == pytest.approx(-t, abs=1e-9)


@given(st.integers(0, 10_000), st.floats(min_value=-2, max_value=2))
@pytest.mark.parametrize("name", ["e2", "h2", "h3", "h2xr", "spd2"])
def test_busemann_geodesically_convex(name, seed, t):
    space = space_from_name(name)
    rng = np.random.default_rng(seed)
    r = _ray(space, rng)
    b = space.random_point(rng)
    u = space.random_unit_tangent(b, rng)
    h = 0.1
    pts = space.geodesic(b, u, np.array([t - h, t, t + h]))
    vals = busemann(r, pts)
    assert vals[2] - 2 * vals[1] + vals[0] >= -1e-9


def test_busemann_unit_gradient(space):
    rng = np.random.default_rng(7)
    r = _ray(space, rng)
    for _ in range(3):
        x = space.random_point(rng, radius=2.0)
        g = fd_gradient(lambda pts: busemann(r, pts), space, x, h=1e-4)
        assert space.norm(x, g) == pytest.approx(1.0, abs=1e-4)


# -- asymptotes -------------------------------------------------------------------
def test_asymptote_from_ray_point():
    r = Ray(H2, O, E1)
    q = np.array([math.sinh(1), 0.0, math.cosh(1)])
    np.testing.assert_allclose(asymptote(q, r).dir, [math.cosh(1), 0, math.sinh(1)], atol=1e-12)


def test_asymptote_worked_example():
    # w = xi / (-<q, xi>) - q with xi = (1, 0, 1)
    q = np.array([0.0, math.sinh(1), math.cosh(1)])
    xi = np.array([1.0, 0.0, 1.0])
    oracle = xi / math.cosh(1) - q
    w = asymptote(q, Ray(H2, O, E1)).dir
    np.testing.assert_allclose(w, oracle, atol=1e-12)
    np.testing.assert_allclose(w, [0.6481, -1.1752, -0.8951], atol=1e-4)


def test_asymptote_euclidean():
    r = Ray(Euclidean(2), np.zeros(2), np.array([1.0, 0.0]))
    out = asymptote(np.array([5.0, 5.0]), r)
    np.testing.assert_allclose(out.base, [5, 5])
    np.testing.assert_allclose(out.dir, [1, 0])


def test_asymptote_gap_bounded(space):
    rng = np.random.default_rng(11)
    for _ in range(5):
        r = _ray(space, rng)
        q = space.random_point(rng, radius=2.0)
        out = asymptote(q, r)
        assert space.norm(q, out.dir) == pytest.approx(1.0, abs=1e-9)
        assert asymptote_gap(r, out) <= space.dist(q, r.base) + 1e-3


def test_asymptote_gap_detects_diverging_rays():
    r1 = Ray(H2, O, E1)
    r2 = Ray(H2, O, np.array([0.0, 1.0, 0.0]))
    assert asymptote_gap(r1, r2) > 10.0


# -- kernel -----------------------------------------------------------------------
def test_h_kernel_euclidean_value():
    E = Euclidean(2)
    assert h_kernel(E, np.zeros(2), np.array([1.0, 2.0]), np.array([3.0, 4.0])) == pytest.approx(11.0)


def test_h_kernel_at_p_is_zero(space, rng):
    p = space.random_point(rng)
    y = space.random_point(rng)
    assert h_kernel(space, p, p, y) == 0.0


def test_h_kernel_h2_worked_value():
    z = np.array([math.sinh(1), 0.0, math.cosh(1)])
    assert h_kernel(H2, O, z, z) == pytest.approx(1.0, abs=1e-12)


def test_h_kernel_bound(space):
    rng = np.random.default_rng(13)
    p = space.random_point(rng)
    z = space.random_point(rng, 200, radius=3.0, center=p)
    y = space.random_point(rng, 200, radius=3.0, center=p)
    excess = np.abs(h_kernel(space, p, z, y)) - space.dist(z, p) * space.dist(y, p)
    assert np.max(excess) <= 1e-9


@given(st.integers(0, 10_000))
def test_h_kernel_euclidean_is_inner_product(seed):
    E = Euclidean(3)
    rng = np.random.default_rng(seed)
    p, z, y = rng.standard_normal((3, 3))
    assert h_kernel(E, p, z, y) == pytest.approx(np.dot(z - p, y - p), abs=1e-12)
