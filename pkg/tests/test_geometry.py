import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from horolab.errors import DegenerateChord, NotInterior, NotOnBoundary
from horolab.geometry import (
    EPS_BND,
    Ellipsoid,
    PBall,
    Polytope,
    SimplexSlice,
    ch_membership,
    chord_endpoints,
    contains,
    face_set,
    segment_in_boundary,
    strict_convexity_probe,
)

DISC = Ellipsoid.ball(2)
SQUARE = Polytope.square()
ELLIPSE = Ellipsoid.axes([2.0, 1.0])
P4 = PBall(np.zeros(2), 1.0, 4.0)

coord = st.floats(-0.7, 0.7, allow_nan=False)
points = st.tuples(coord, coord).map(np.array)


def test_contains_examples():
    assert contains(DISC, [0.0, 0.0])
    assert not contains(DISC, [1.0, 0.0])
    assert contains(SQUARE, [0.999, 0.999])


def test_chord_disc_and_square():
    for body in (DISC, SQUARE):
        c = chord_endpoints(body, [0.0, 0.0], [0.5, 0.0])
        np.testing.assert_allclose(c.a, [-1.0, 0.0], atol=1e-15)
        np.testing.assert_allclose(c.b, [1.0, 0.0], atol=1e-15)


def test_degenerate_and_exterior_chords():
    with pytest.raises(DegenerateChord):
        chord_endpoints(DISC, [0.0, 0.0], [0.0, 0.0])
    with pytest.raises(NotInterior):
        chord_endpoints(DISC, [0.0, 0.0], [1.5, 0.0])


def test_segment_in_boundary_examples():
    assert segment_in_boundary(SQUARE, [1.0, -0.5], [1.0, 0.5])
    assert not segment_in_boundary(DISC, [1.0, 0.0], [0.0, 1.0])
    assert not segment_in_boundary(SQUARE, [1.0, 0.0], [0.0, 1.0])
    with pytest.raises(NotOnBoundary):
        segment_in_boundary(DISC, [0.5, 0.0], [1.0, 0.0])


def test_ch_membership_examples():
    assert ch_membership(SQUARE, [1.0, 0.0], [1.0, 0.9])
    assert not ch_membership(SQUARE, [1.0, 0.0], [-1.0, 0.0])
    assert ch_membership(ELLIPSE, [2.0, 0.0], [2.0, 0.0])


def test_face_set_corner():
    assert face_set(SQUARE, [1.0, 1.0]).active_indices.__len__() == 2
    assert len(face_set(SQUARE, [1.0, 0.2]).active_indices) == 1


def test_strict_convexity_probe():
    assert strict_convexity_probe(ELLIPSE, 1000).verdict == "NoCounterexampleFound"
    assert strict_convexity_probe(P4, 1000).verdict == "NoCounterexampleFound"
    res = strict_convexity_probe(SQUARE, 1000)
    assert res.verdict == "NotStrictlyConvex"
    xi, eta = res.witness
    assert segment_in_boundary(SQUARE, xi, eta)


def test_simplex_chart_and_slice():
    tri = Polytope.simplex(2)
    assert tri.is_standard_simplex()
    assert contains(tri, [0.2, 0.3])
    assert not contains(tri, [0.6, 0.6])
    sl = SimplexSlice(3)
    assert sl.depth(np.array([0.2, 0.3, 0.5])) == pytest.approx(0.2)
    assert sl.depth(np.array([0.2, 0.3, 0.6])) == -np.inf


def test_pball_exit_solves_boundary_equation():
    rng = np.random.default_rng(1)
    for p in (1.5, 3.0, 8.0):
        body = PBall(np.zeros(3), 2.0, p)
        x = body.sample_interior(rng, 500)
        d = rng.standard_normal((500, 3))
        t = body.exit_time(x, d)
        assert np.max(body.boundary_residual(x + t[:, None] * d)) <= EPS_BND


@given(points, points)
def test_chord_ordering_and_residual(x, y):
    for body in (DISC, SQUARE, ELLIPSE, P4):
        if np.linalg.norm(x - y) < 1e-6:
            return
        c = chord_endpoints(body, x, y)
        assert body.boundary_residual(c.a) <= EPS_BND
        assert body.boundary_residual(c.b) <= EPS_BND
        # position along the line a -> b
        span = c.b - c.a
        sx = (x - c.a) @ span / (span @ span)
        sy = (y - c.a) @ span / (span @ span)
        assert 0 < sx < sy < 1


@given(points, points)
def test_chord_symmetry(x, y):
    if np.linalg.norm(x - y) < 1e-6:
        return
    for body in (DISC, SQUARE, P4):
        c1 = chord_endpoints(body, x, y)
        c2 = chord_endpoints(body, y, x)
        np.testing.assert_allclose(c1.a, c2.b, atol=1e-12)
        np.testing.assert_allclose(c1.b, c2.a, atol=1e-12)


@given(points, points, st.floats(0.3, 3.0), st.floats(-1.0, 1.0), st.floats(-2.0, 2.0))
def test_chord_affine_equivariance(x, y, scale, shear, shift):
    if np.linalg.norm(x - y) < 1e-6:
        return
    a = np.array([[scale, shear], [0.0, 1.0 / scale]])
    b = np.array([shift, -shift])
    for body in (DISC, SQUARE, ELLIPSE):
        moved = body.transformed(a, b)
        c = chord_endpoints(body, x, y)
        cm = chord_endpoints(moved, a @ x + b, a @ y + b)
        np.testing.assert_allclose(cm.a, a @ c.a + b, atol=10 * EPS_BND)
        np.testing.assert_allclose(cm.b, a @ c.b + b, atol=10 * EPS_BND)
