import numpy as np
import pytest

from horoduality.duality import radial_conjugate
from horoduality.functions import FunctionSpec, HSpec
from horoduality.geometry import Euclidean, Hyperbolic
from horoduality.horoball import asymptote_gap, h_kernel, make_ray
from horoduality.isometry import LorentzMap, identity, random_isometry
from horoduality.search import SearchBudget
from horoduality.subgradient import (is_subgradient, radial_subgradient, subgradient_from_equality,
                                     transport_subgradient, witness_point)

H2 = Hyperbolic(2)
O = H2.origin()
E2 = Euclidean(2)
Z2 = np.zeros(2)
QUAD = HSpec.quadratic(1.0)
FAST = SearchBudget(n_samples=300, refine_iters=100)


# -- witness points ----------------------------------------------------------------------
def test_witness_euclidean_reduction():
    w = witness_point(E2, Z2, np.array([1.0, 0.0]), np.array([0.0, 2.0]))
    np.testing.assert_allclose(w.eta, [0, -1], atol=1e-15)
    np.testing.assert_allclose(w.y, [0, 2], atol=1e-12)


def test_witness_zero_vector_is_p():
    w = witness_point(H2, O, H2.polar(1.0, 0.5), np.zeros(3))
    assert w.eta is None
    np.testing.assert_array_equal(w.y, O)


def test_witness_h2_ray_through_p():
    x = H2.polar(1.0, 0.8)
    v = -H2.log(x, O)
    w = witness_point(H2, O, x, v)
    np.testing.assert_allclose(w.eta, -H2.log(O, x), atol=1e-12)
    assert H2.dist(w.y, x) <= 1e-9
    assert h_kernel(H2, O, x, x) == pytest.approx(1.0, abs=1e-12)


def test_witness_invariants(space):
    rng = np.random.default_rng(1)
    p = space.random_point(rng)
    x = space.random_point(rng)
    v = 1.3 * space.random_unit_tangent(x, rng)
    w = witness_point(space, p, x, v)
    assert space.norm(p, w.eta) == pytest.approx(1.0, abs=1e-9)
    assert space.dist(w.y, space.exp(p, -1.3 * w.eta)) <= 1e-9
    gap = asymptote_gap(make_ray(space, p, w.eta), make_ray(space, x, -v), t_max=10.0)
    assert gap <= space.dist(p, x) + 1e-6


def test_witness_euclidean_is_p_plus_v():
    E = Euclidean(3)
    rng = np.random.default_rng(2)
    for _ in range(1000):
        p, x, v = rng.standard_normal((3, 3))
        assert np.max(np.abs(witness_point(E, p, x, v).y - (p + v))) <= 1e-12


# -- radial gradients -------------------------------------------------------------------
def test_radial_subgradient_quadratic():
    x = H2.polar(1.0, 0.4)
    v = radial_subgradient(QUAD, O, x, H2)
    np.testing.assert_allclose(v, -H2.log(x, O), atol=1e-14)
    assert H2.norm(x, v) == pytest.approx(1.0)


def test_radial_subgradient_at_p_is_zero():
    assert np.all(radial_subgradient(HSpec.power(3.0), O, O, H2) == 0)


def test_power2_matches_quadratic():
    rng = np.random.default_rng(0)
    for x in H2.random_point(rng, 10, radius=3.0):
        np.testing.assert_allclose(radial_subgradient(HSpec.power(2.0), O, x, H2),
                                   radial_subgradient(QUAD, O, x, H2), atol=1e-12)


# -- membership -----------------------------------------------------------------------------
def test_membership_euclidean_gradient():
    f = FunctionSpec.half_dist_sq(Z2, E2)
    x = np.array([1.0, 0.0])
    rep = is_subgradient(f, Z2, x, np.array([1.0, 0.0]), FAST)
    assert rep.passed
    assert rep.metrics["min_slack"] == pytest.approx(0.0, abs=1e-9)


def test_membership_h2_gradient_and_scaled():
    f = FunctionSpec.radial(QUAD, O, H2)
    x = H2.polar(1.0, 0.0)
    v = radial_subgradient(QUAD, O, x, H2)
    good = is_subgradient(f, O, x, v, FAST)
    assert good.passed and abs(good.metrics["equality_residual"]) <= 1e-6
    assert good.metrics["exact_conjugate"]
    bad = is_subgradient(f, O, x, 2 * v, FAST)
    assert not bad.passed and bad.metrics["min_slack"] < -1e-3
    assert bad.witness["z"] is not None


def test_zero_vector_at_minimum():
    f = FunctionSpec.radial(QUAD, O, H2)
    assert is_subgradient(f, O, O, np.zeros(3), FAST).passed


def test_zero_vector_off_minimum_rejected():
    f = FunctionSpec.radial(QUAD, O, H2)
    assert not is_subgradient(f, O, H2.polar(1.0, 0.0), np.zeros(3), FAST).passed


@pytest.mark.parametrize("seed", range(10))
def test_fenchel_young_equality_radial(seed):
    space = [H2, E2][seed % 2]
    p = space.origin()
    rng = np.random.default_rng(seed)
    h = [QUAD, HSpec.power(3.0)][(seed // 2) % 2]
    f = FunctionSpec.radial(h, p, space)
    x = space.random_point(rng, radius=2.5)
    v = radial_subgradient(h, p, x, space)
    y = witness_point(space, p, x, v).y
    res = f(x) + radial_conjugate(h, p, y, space).value - h_kernel(space, p, x, y)
    assert abs(res) <= 1e-6


# -- recovery from equality ------------------------------------------------------------
def test_recovery_euclidean():
    f = FunctionSpec.half_dist_sq(Z2, E2)
    np.testing.assert_allclose(subgradient_from_equality(f, Z2, np.array([3.0, -1.0]),
                                                         np.array([0.0, 2.0])), [0, 2], atol=1e-12)


def test_recovery_h2_worked_case():
    f = FunctionSpec.radial(QUAD, O, H2)
    x = H2.polar(1.0, 1.1)
    np.testing.assert_allclose(subgradient_from_equality(f, O, x, x),
                               radial_subgradient(QUAD, O, x, H2), atol=1e-9)


def test_recovery_rejects_p():
    with pytest.raises(ValueError):
        subgradient_from_equality(FunctionSpec.radial(QUAD, O, H2), O, H2.polar(1, 0), O)


def test_recovery_round_trip(space):
    rng = np.random.default_rng(9)
    p = space.origin()
    f = FunctionSpec.half_dist_sq(p, space)
    for _ in range(100 // 7 + 1):
        x = space.random_point(rng, radius=2.0)
        v = rng.uniform(0.2, 2.0) * space.random_unit_tangent(x, rng)
        y = witness_point(space, p, x, v).y
        back = subgradient_from_equality(f, p, x, y)
        assert space.norm(x, back - v) <= 1e-6


# -- transport ------------------------------------------------------------------------
def test_transport_identity():
    x = H2.polar(1.0, 0.2)
    u = H2.random_unit_tangent(x, np.random.default_rng(0))
    np.testing.assert_array_equal(transport_subgradient(identity(H2), O, x, u), u)


def test_transport_checks_base():
    iso = LorentzMap.boost(H2, 1.0)
    with pytest.raises(ValueError):
        transport_subgradient(iso, O, O, np.array([1.0, 0, 0]), p=O)


def test_transport_preserves_norm(space):
    rng = np.random.default_rng(3)
    iso = random_isometry(space, 4)
    b = space.random_point(rng)
    u = space.random_unit_tangent(b, rng)
    assert space.norm(iso(b), transport_subgradient(iso, space.origin(), b, u)) == pytest.approx(
        1.0, abs=1e-10)


@pytest.mark.parametrize("seed", range(6))
def test_transport_membership_agrees(seed):
    iso = LorentzMap.boost(H2, 1.0)
    rng = np.random.default_rng(seed)
    p = H2.random_point(rng)
    q = iso.inverse()(p)
    f = FunctionSpec.radial(QUAD, p, H2)
    g = FunctionSpec.pullback(f, iso)
    b = H2.random_point(rng, radius=1.5)
    u = radial_subgradient(QUAD, q, b, H2) * (1.0 if seed % 2 == 0 else 2.0)
    left = is_subgradient(g, q, b, u, FAST).passed
    right = is_subgradient(f, p, iso(b), transport_subgradient(iso, q, b, u, p=p), FAST).passed
    assert left == right == (seed % 2 == 0)
