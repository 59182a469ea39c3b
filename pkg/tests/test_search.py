import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from horoduality.geometry import Euclidean, Hyperbolic, space_from_name
from horoduality.horoball import Ray, busemann
from horoduality.search import (SearchBudget, fd_gradient, golden_section, maximize_cylinder,
                                sphere_coefficients)


def test_budget_defaults():
    b = SearchBudget()
    assert (b.t_max, b.sphere_samples, b.t_samples, b.refine_iters) == (12.0, 96, 64, 200)
    assert (b.tol, b.divergence_slack, b.sample_radius, b.n_samples, b.max_doublings) == (
        1e-6, 0.05, 8.0, 1000, 8)


@pytest.mark.parametrize("bad", [dict(t_max=0.0), dict(tol=-1.0), dict(t_samples=1),
                                 dict(sphere_samples=0), dict(t_max=float("inf"))])
def test_budget_rejects_invalid(bad):
    with pytest.raises(ValueError):
        SearchBudget(**bad)


def test_budget_parse():
    b = SearchBudget.parse("t_max=24,tol=1e-7")
    assert b.t_max == 24.0 and b.tol == 1e-7
    with pytest.raises(ValueError):
        SearchBudget.parse("bogus=1")


def test_golden_section_examples():
    t, m = golden_section(lambda t: (t - 1) ** 2, 0, 3, 1e-10)
    assert t == pytest.approx(1.0, abs=1e-8)
    t, m = golden_section(lambda t: -(t - t * t / 2), 0, 12, 1e-10)
    assert t == pytest.approx(1.0, abs=1e-6) and m == pytest.approx(-0.5)
    t, _ = golden_section(lambda t: -t, 0, 1, 1e-10)
    assert t == pytest.approx(1.0, abs=1e-8)


@pytest.mark.parametrize("dim", [1, 2, 3, 5])
def test_sphere_coefficients_unit(dim):
    c = sphere_coefficients(dim, 50, seed=0)
    np.testing.assert_allclose(np.linalg.norm(c, axis=1), 1.0)


def test_cylinder_trivial():
    E = Euclidean(2)
    res = maximize_cylinder(lambda V, t: -np.broadcast_to(t, (len(V), len(t))), E, np.zeros(2),
                            SearchBudget())
    assert res.value == 0.0 and res.t == 0.0


def test_cylinder_completing_the_square():
    E = Euclidean(2)
    res = maximize_cylinder(lambda V, t: t[None, :] * V[:, :1] - t[None, :] ** 2, E, np.zeros(2),
                            SearchBudget())
    assert res.value == pytest.approx(0.25, abs=1e-8)
    assert res.t == pytest.approx(0.5, abs=1e-4)
    np.testing.assert_allclose(res.v, [1, 0], atol=1e-3)


def _objective(seed, space):
    rng = np.random.default_rng(seed)
    a = space.from_coords(space.origin(), rng.standard_normal(space.dim))
    c = rng.uniform(0.2, 2.0)

    def obj(V, t):
        proj = np.array([space.inner(space.origin(), v, a) for v in V])
        return proj[:, None] * t[None, :] - c * t[None, :] ** 2 + np.sin(3 * proj)[:, None]

    return obj


@pytest.mark.parametrize("seed", range(100))
def test_refinement_never_below_grid(seed):
    H = Hyperbolic(2)
    res = maximize_cylinder(_objective(seed, H), H, H.origin(), SearchBudget(refine_iters=40),
                            seed=seed)
    assert res.value >= res.grid_value


@pytest.mark.parametrize("seed", range(5))
def test_more_samples_never_worse(seed):
    E = Euclidean(3)
    obj = _objective(seed, E)
    b = SearchBudget(sphere_samples=24, t_samples=16, refine_iters=1)
    r1 = maximize_cylinder(obj, E, np.zeros(3), b)
    r2 = maximize_cylinder(obj, E, np.zeros(3), b.replace(sphere_samples=48, t_samples=31))
    assert r2.grid_value >= r1.grid_value - 1e-12


def test_cylinder_deterministic():
    H = Hyperbolic(2)
    runs = [maximize_cylinder(_objective(1, H), H, H.origin(), SearchBudget(), seed=4)
            for _ in range(2)]
    assert runs[0].value == runs[1].value
    np.testing.assert_array_equal(runs[0].v, runs[1].v)


def test_cylinder_rejects_nan():
    E = Euclidean(2)
    with pytest.raises(ValueError):
        maximize_cylinder(lambda V, t: np.full((len(V), len(t)), np.nan), E, np.zeros(2),
                          SearchBudget())


@given(st.integers(0, 10_000))
@pytest.mark.parametrize("name", ["e2", "h2", "spd2"])
def test_fd_gradient_half_dist_sq(name, seed):
    space = space_from_name(name)
    rng = np.random.default_rng(seed)
    p, q = space.random_point(rng, 2, radius=1.5)
    g = fd_gradient(lambda x: 0.5 * space.dist(x, q) ** 2, space, p, h=1e-4)
    assert np.max(np.abs(g + space.log(p, q))) <= 1e-5


def test_fd_gradient_busemann_unit():
    H = Hyperbolic(3)
    rng = np.random.default_rng(0)
    r = Ray(H, H.origin(), H.tangent_basis(H.origin())[0])
    x = H.random_point(rng)
    g = fd_gradient(lambda pts: busemann(r, pts), H, x)
    assert H.norm(x, g) == pytest.approx(1.0, abs=1e-4)


def test_fd_gradient_constant():
    S = space_from_name("spd2")
    g = fd_gradient(lambda x: np.full(len(x), 3.0), S, S.origin())
    assert np.max(np.abs(g)) <= 1e-10


@pytest.mark.parametrize("d", [0.02, 0.05, 0.1, 0.15])
def test_cylinder_optimum_inside_first_cell(d):
    # maximizer t* = d sits between the grid radii 0 and t_max / (t_samples - 1)
    H = Hyperbolic(2)
    o = H.origin()
    x = H.polar(d, 1.0)
    f = lambda z: 0.5 * H.dist(z, o) ** 2

    def obj(V, t):
        b = busemann(Ray(H, o, V), x)
        out = np.empty((len(V), len(t)))
        for i, v in enumerate(V):
            out[i] = t * b[i] - f(H.exp(np.broadcast_to(o, (len(t), 3)), -t[:, None] * v))
        return out

    res = maximize_cylinder(obj, H, o, SearchBudget())
    assert res.value == pytest.approx(0.5 * d * d, abs=1e-9)
