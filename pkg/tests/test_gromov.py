import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from horolab import Ellipsoid, MetricSpace, Polytope
from horolab.errors import NotEscaping, PreconditionNotMet
from horolab.gromov import (
    ScaledMetric,
    busemann_convexity_probe,
    delta_at_depth,
    delta_estimate,
    flat_sampler,
    four_point_defect,
    geodesic_ray_limit,
    gromov_product,
    orbit_gromov_convergence,
    radial,
    zigzag,
)
from horolab.maps import KleinIsometry, MobiusDisc, Rotation

from oracles import DELTA_DISC, brute_force_disc_delta, disc_net, klein_disc_distance

DISC = MetricSpace.hilbert(Ellipsoid.ball(2))
POINC = MetricSpace.poincare_disc()
SQUARE = MetricSpace.hilbert(Polytope.square())

inner = st.tuples(st.floats(0.0, 2 * np.pi), st.floats(0.0, 0.9)).map(
    lambda p: p[1] * np.array([np.cos(p[0]), np.sin(p[0])])
)


def test_frozen_disc_delta_matches_brute_force():
    assert brute_force_disc_delta(disc_net()) == pytest.approx(DELTA_DISC, abs=1e-12)


def test_package_defects_agree_with_oracle_on_the_net():
    pts = disc_net()
    idx = np.array(np.meshgrid(*[np.arange(12)] * 4, indexing="ij")).reshape(4, -1).T
    q = pts[idx]
    defect = four_point_defect(DISC, q[:, 0], q[:, 1], q[:, 2], q[:, 3])
    assert defect.max() == pytest.approx(DELTA_DISC, abs=1e-9)


@given(inner, inner, inner)
def test_gromov_product_bounds(x, y, w):
    p = gromov_product(DISC, x, y, w)
    dxw, dyw = klein_disc_distance(x, w), klein_disc_distance(y, w)
    assert -1e-9 <= p <= min(dxw, dyw) + 1e-9
    assert p == pytest.approx(gromov_product(DISC, y, x, w), abs=1e-12)
    assert gromov_product(DISC, x, x, w) == pytest.approx(dxw, abs=1e-9)


@given(inner, inner, inner, st.floats(0.1, 10.0))
def test_gromov_product_scales_with_metric(x, y, w, c):
    scaled = ScaledMetric(DISC, c)
    assert gromov_product(scaled, x, y, w) == pytest.approx(c * gromov_product(DISC, x, y, w), abs=1e-9 * c)


def test_delta_scales_with_metric():
    base = delta_estimate(DISC, 5000, seed=2)
    scaled = delta_estimate(ScaledMetric(DISC, 3.0), 5000, seed=2)
    assert scaled.delta_hat == pytest.approx(3.0 * base.delta_hat, rel=1e-9)


def test_disc_delta_below_frozen_bound():
    est = delta_estimate(DISC, 20_000, seed=0)
    assert 0.5 < est.delta_hat <= 1.1 * DELTA_DISC
    assert est.worst.shape == (4, 2)


def test_delta_estimate_is_monotone_in_budget():
    vals = [delta_estimate(DISC, n, seed=5, block=1000).delta_hat for n in (500, 1000, 4000, 8000)]
    assert vals == sorted(vals)
    with pytest.raises(ValueError):
        delta_estimate(DISC, 0)


def test_square_defect_grows_toward_the_boundary():
    vals = [delta_at_depth(SQUARE, k, 5000, seed=0).delta_hat for k in range(4, 11)]
    assert np.all(np.diff(vals) > 0)


def test_boost_orbit_converges_in_gromov_sense():
    rep = orbit_gromov_convergence(KleinIsometry.boost(0.3), DISC, [0.0, 0.0], n=400)
    assert rep.holds and rep.pairs_checked > 0
    assert rep.band_minima == sorted(rep.band_minima)
    rep = orbit_gromov_convergence(MobiusDisc(-0.5, 0.0), POINC, [0.2, 0.1], w=[0.0, 0.0], n=200)
    assert rep.holds
    with pytest.raises(NotEscaping):
        orbit_gromov_convergence(Rotation(0.4), DISC, [0.3, 0.0], n=300)


def test_ray_limits_of_radial_and_zigzag_sequences():
    w = np.zeros(2)
    (rad,) = geodesic_ray_limit(DISC, w, radial([1.0, 0.0]), [2.0])
    assert rad.tail_diameter <= 1e-12
    np.testing.assert_allclose(rad.samples[-1], [np.tanh(1.0), 0.0], atol=1e-12)
    (zz,) = geodesic_ray_limit(DISC, w, zigzag(), [2.0])
    assert zz.tail_diameter < 0.05
    # early terms closer to w than r cannot carry a point at distance r
    assert zz.skipped == [0, 1] and len(zz.used) == 38
    with pytest.raises(PreconditionNotMet):
        geodesic_ray_limit(DISC, w, radial([1.0, 0.0], 3), [50.0])


def test_busemann_convexity_probe():
    assert busemann_convexity_probe(POINC, 5000, seed=0).violations == 0
    assert busemann_convexity_probe(DISC, 5000, seed=0).violations == 0
    rep = busemann_convexity_probe(SQUARE, 5000, seed=0, sampler=flat_sampler)
    assert rep.violations > 0 and rep.witness["excess"] > 1e-8


def test_documented_product_examples():
    x, y, w = np.array([0.1, 0.2]), np.array([-0.4, 0.3]), np.array([0.0, -0.5])
    assert gromov_product(DISC, w, y, w) == pytest.approx(0.0, abs=1e-12)
    assert gromov_product(DISC, x, x, w) == pytest.approx(klein_disc_distance(x, w), abs=1e-12)
    assert float(four_point_defect(DISC, x, x, x, x)) == 0.0


def test_disc_delta_within_oracle_value():
    assert delta_estimate(DISC, 100_000, seed=0).delta_hat <= DELTA_DISC


def test_mobius_bands_diverge():
    rep = orbit_gromov_convergence(MobiusDisc(-0.5, 0.0), POINC, [0.0, 0.0], n=400)
    assert rep.holds and max(rep.band_minima) > 10


def test_zero_radius_ray_limit_is_the_base_point():
    w = np.array([0.1, 0.0])
    (lim,) = geodesic_ray_limit(DISC, w, zigzag(), [0.0])
    np.testing.assert_array_equal(lim.samples, np.tile(w, (len(lim.samples), 1)))
