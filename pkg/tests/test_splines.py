import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.interpolate import BSpline

from shellbar import splines
from shellbar.benchmarks import get_case
from shellbar.errors import DomainError
from shellbar.model import ControlNet, surface_point
from shellbar.splines import KnotVector


@st.composite
def knot_vectors(draw, max_degree=4):
    p = draw(st.integers(1, max_degree))
    interior = draw(st.lists(st.floats(0.05, 0.95), min_size=0, max_size=5))
    # clamp multiplicities so the basis stays at least C0
    vals, counts = np.unique(np.round(interior, 3), return_counts=True)
    interior = np.repeat(vals, np.minimum(counts, p))
    knots = np.concatenate([np.zeros(p + 1), interior, np.ones(p + 1)])
    return KnotVector(p, knots)


def test_find_span_examples():
    kv = KnotVector(2, [0, 0, 0, 0.5, 1, 1, 1])
    assert splines.find_span(kv, 0.0) == 2
    assert splines.find_span(kv, 0.25) == 2
    assert splines.find_span(kv, 0.5) == 3
    assert splines.find_span(kv, 1.0) == 3
    with pytest.raises(DomainError):
        splines.find_span(kv, 1.5)


@pytest.mark.parametrize(
    "knots, degree",
    [([0, 0, 1, 1, 1], 2), ([0, 0, 0, 1, 0.5, 1, 1], 2), ([0, 0, 0, 1, 1], 2), ([0, 0, 1, 1], 0)],
)
def test_knot_vector_rejects_invalid(knots, degree):
    with pytest.raises(ValueError):
        KnotVector(degree, knots)


def test_bezier_end_values():
    kv = KnotVector(2, [0, 0, 0, 1, 1, 1])
    np.testing.assert_allclose(splines.all_basis(kv, 0.0), [1, 0, 0])
    np.testing.assert_allclose(splines.all_basis(kv, 1.0), [0, 0, 1])
    np.testing.assert_allclose(splines.all_basis(kv, 0.5), [0.25, 0.5, 0.25])


@settings(max_examples=60, deadline=None)
@given(knot_vectors(), st.floats(0.0, 1.0))
def test_basis_matches_scipy_and_sums_to_one(kv, u):
    ours = splines.all_basis(kv, u)
    assert np.all(ours >= -1e-14)
    assert abs(ours.sum() - 1.0) < 1e-13
    # scipy treats the right end as outside the half-open last span
    x = min(u, np.nextafter(1.0, 0.0))
    ref = BSpline.design_matrix([x], kv.knots, kv.degree).toarray()[0]
    np.testing.assert_allclose(ours, ref, atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(knot_vectors(), st.floats(0.02, 0.98))
def test_derivatives_match_finite_differences(kv, u):
    h = 1e-6
    # stay inside one span so the central difference sees a smooth polynomial
    k = kv.unique_knots()
    if np.min(np.abs(k - u)) < 2 * h:
        u += 4 * h
    span = splines.find_span(kv, u)
    d = splines.basis_and_derivatives(kv, u, 1, span)
    fp = splines.basis_and_derivatives(kv, u + h, 0, span)[0]
    fm = splines.basis_and_derivatives(kv, u - h, 0, span)[0]
    fd = (fp - fm) / (2 * h)
    scale = max(1.0, np.abs(d[1]).max())
    assert np.abs(fd - d[1]).max() <= 1e-6 * scale


def test_greville_abscissae():
    np.testing.assert_allclose(splines.greville_abscissae(KnotVector(2, [0, 0, 0, 1, 1, 1])), [0, 0.5, 1])
    np.testing.assert_allclose(
        splines.greville_abscissae(KnotVector(2, [0, 0, 0, 0.5, 1, 1, 1])), [0, 0.25, 0.75, 1]
    )


def test_uniform_knots():
    kv = KnotVector(2, [0, 0, 0, 0.5, 1, 1, 1])
    np.testing.assert_allclose(splines.uniform_knots(kv, 2), [0.25, 0.75])
    assert splines.uniform_knots(kv, 1) == []


def _random_net(n, m, seed):
    rng = np.random.default_rng(seed)
    return ControlNet(rng.normal(size=(n, m, 3)), rng.uniform(0.5, 2.0, size=(n, m)))


def _surface(kx, ky, net, u, v):
    basis = splines.SurfaceBasis(kx, ky, net.weights)
    idx, R, _ = splines.rational_surface_basis(basis, u, v)
    return R @ net.flat_points()[idx]


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.lists(st.floats(0.01, 0.99), min_size=1, max_size=4))
def test_knot_insertion_preserves_geometry(seed, new):
    kx = KnotVector(2, [0, 0, 0, 0.5, 1, 1, 1])
    ky = KnotVector(2, [0, 0, 0, 1, 1, 1])
    net = _random_net(4, 3, seed)
    new = sorted(set(np.round(new, 6)) - {0.5})
    kx2, net2 = splines.insert_knots(kx, new, net, 0)
    ky2, net3 = splines.insert_knots(ky, new, net2, 1)
    assert net3.shape == (4 + len(new), 3 + len(new))
    for u, v in [(0.1, 0.2), (0.5, 0.5), (0.77, 0.93), (1.0, 1.0)]:
        np.testing.assert_allclose(_surface(kx2, ky2, net3, u, v), _surface(kx, ky, net, u, v), atol=1e-12)


@pytest.mark.parametrize("times", [1, 2])
def test_degree_elevation_preserves_geometry(times):
    kx = KnotVector(2, [0, 0, 0, 0.4, 1, 1, 1])
    ky = KnotVector(2, [0, 0, 0, 1, 1, 1])
    net = _random_net(4, 3, 7)
    kx2, net2 = splines.elevate_degree(kx, net, times, 0)
    ky2, net3 = splines.elevate_degree(ky, net2, times, 1)
    assert kx2.degree == 2 + times and kx2.multiplicity(0.4) == 1 + times
    for u, v in [(0.1, 0.2), (0.4, 0.5), (0.77, 0.93)]:
        np.testing.assert_allclose(_surface(kx2, ky2, net3, u, v), _surface(kx, ky, net, u, v), atol=1e-12)


def test_quarter_circle_stays_on_circle_after_refinement():
    case = get_case("hemisphere")
    from shellbar.model import refine

    model = refine(case.model, 3, 3)
    for u in np.linspace(0, 1, 7):
        for v in np.linspace(0, 1, 7):
            x, _, _ = surface_point(model, u, v)
            assert abs(np.linalg.norm(x) - 10.0) < 1e-8


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.05, 0.95), st.floats(0.05, 0.95))
def test_rational_basis_partition_and_derivatives(seed, u, v):
    kx = KnotVector(2, [0, 0, 0, 0.5, 1, 1, 1])
    ky = KnotVector(3, [0, 0, 0, 0, 1, 1, 1, 1])
    net = _random_net(4, 4, seed)
    basis = splines.SurfaceBasis(kx, ky, net.weights)
    if abs(u - 0.5) < 1e-4:
        u += 1e-3
    idx, R, dR = splines.rational_surface_basis(basis, u, v)
    assert abs(R.sum() - 1.0) < 1e-13
    assert abs(dR.sum(axis=0)).max() < 1e-12
    h = 1e-6
    spans = (splines.find_span(kx, u), splines.find_span(ky, v))
    Rp = splines.rational_surface_basis(basis, u + h, v, spans)[1]
    Rm = splines.rational_surface_basis(basis, u - h, v, spans)[1]
    assert np.abs((Rp - Rm) / (2 * h) - dR[:, 0]).max() < 1e-6 * max(1, np.abs(dR).max())
    Rp = splines.rational_surface_basis(basis, u, v + h, spans)[1]
    Rm = splines.rational_surface_basis(basis, u, v - h, spans)[1]
    assert np.abs((Rp - Rm) / (2 * h) - dR[:, 1]).max() < 1e-6 * max(1, np.abs(dR).max())


def test_elements_layout():
    kx = KnotVector(2, [0, 0, 0, 0.25, 0.5, 1, 1, 1])
    ky = KnotVector(2, [0, 0, 0, 0.5, 1, 1, 1])
    els = splines.elements(kx, ky)
    assert len(els) == 6
    assert [e.index for e in els] == list(range(6))
    assert els[1].xi_range == (0.25, 0.5) and els[1].eta_range == (0.0, 0.5)
    assert sum(e.parametric_area for e in els) == pytest.approx(1.0)


@pytest.mark.parametrize("orders", [(0, 0), (1, 0), (0, 1), (1, 1), (2, 1)])
def test_projection_basis_partition_of_unity(orders):
    e = splines.elements(KnotVector(2, [0, 0, 0, 0.5, 1, 1, 1]), KnotVector(2, [0, 0, 0, 1, 1, 1]))[1]
    xi = np.linspace(0.5, 1.0, 5)
    eta = np.linspace(0.0, 1.0, 5)
    nb = splines.projection_basis(e, orders, xi, eta)
    assert nb.shape == ((orders[0] + 1) * (orders[1] + 1), 5)
    np.testing.assert_allclose(nb.sum(axis=0), 1.0, atol=1e-14)


def test_bernstein_derivative_matches_finite_difference():
    s = np.linspace(0.1, 0.9, 5)
    h = 1e-6
    d = splines.bernstein(3, s, 1)
    fd = (splines.bernstein(3, s + h) - splines.bernstein(3, s - h)) / (2 * h)
    np.testing.assert_allclose(d, fd, atol=1e-6)
