"""Acceptance suite: one test per criterion, each at its stated tolerance.

A summary line per criterion is printed at the end of the pytest run.
"""

import json

import numpy as np
import pytest

from horolab import Ellipsoid, MetricSpace, PBall, Polytope
from horolab.axioms import (
    REFUTED,
    SUPPORTED_WITHIN_BUDGET,
    approach_sequence,
    check_axiom4,
    check_condition_B,
    check_condition_Bprime,
    check_condition_C,
)
from horolab.dynamics import (
    BOUNDED,
    ESCAPING,
    Thresholds,
    asymptotic_center,
    calka_consistent,
    classify_from,
    denjoy_wolff_estimate,
    iterate,
)
from horolab.errors import UndecidedWithinBudget
from horolab.gromov import delta_at_depth, delta_estimate, geodesic_ray_limit, orbit_gromov_convergence, zigzag
from horolab.horoball import busemann_estimate, horoball_sample, horoball_witness, invariance_check
from horolab.maps import (
    KleinIsometry,
    MatrixProjective,
    MobiusDisc,
    boost_matrix,
    conjugate_projective,
    standard_library,
)
from horolab.metrics import distance
from horolab.runner import main

from oracles import DELTA_DISC, cone_distance, mobius_power_orbit, perron_point, poincare_distance

DISC = MetricSpace.hilbert(Ellipsoid.ball(2))
POINC = MetricSpace.poincare_disc()
ELLIPSE = MetricSpace.hilbert(Ellipsoid.axes([2.0, 1.0]))
P4 = MetricSpace.hilbert(PBall(np.zeros(2), 1.0, 4.0))
SQUARE = MetricSpace.hilbert(Polytope.square())
GRID5 = np.array([[a, b] for a in np.linspace(-0.5, 0.5, 5) for b in np.linspace(-0.5, 0.5, 5)])


@pytest.mark.criterion(1, "cross-ratio and cone-formula distances agree on simplex slices, dims 2-5")
def test_metric_identity(record_property):
    worst = 0.0
    for dim in (2, 3, 4, 5):
        rng = np.random.default_rng(100 + dim)
        x = rng.dirichlet(np.ones(dim), 10_000)
        y = rng.dirichlet(np.ones(dim), 10_000)
        cone = distance(MetricSpace.hilbert_cone(dim), x, y, guard=0.0)
        chart = distance(MetricSpace.hilbert(Polytope.simplex(dim - 1)), x[:, :-1], y[:, :-1], guard=0.0)
        worst = max(worst, float(np.max(np.abs(cone - chart))))
        # spot-check the package cone formula against the ratio-maxima oracle
        for i in range(0, 10_000, 997):
            assert cone[i] == pytest.approx(cone_distance(x[i], y[i]), abs=1e-12)
    record_property("measured", f"max |difference| = {worst:.2e}")
    assert worst <= 1e-9


@pytest.mark.criterion(2, "anchor values and disc doubling")
def test_anchor_values(record_property):
    assert abs(distance(DISC, [0, 0], [0.5, 0]) - np.log(3)) <= 1e-12
    assert abs(distance(MetricSpace.hilbert_cone(2), [0.5, 0.5], [0.25, 0.75]) - np.log(3)) <= 1e-12
    assert abs(distance(MetricSpace.thompson_cone(2), [0.5, 0.5], [0.25, 0.75]) - np.log(2)) <= 1e-12
    assert abs(distance(POINC, [0, 0], [0.5, 0]) - np.arctanh(0.5)) <= 1e-12
    rng = np.random.default_rng(2)
    x = DISC.domain.sample_interior(rng, 1000)
    norms = np.linalg.norm(x, axis=1)
    hilbert = distance(DISC, np.zeros_like(x), x)
    oracle = np.array([poincare_distance((0.0, 0.0), (r, 0.0)) for r in norms])
    worst = float(np.max(np.abs(hilbert - 2 * oracle)))
    record_property("measured", f"doubling max error = {worst:.2e}")
    assert worst <= 1e-10


@pytest.mark.criterion(3, "condition C on HilbertCone(3), ellipse and Poincare disc")
def test_condition_C(record_property):
    out = []
    for name, space in (("cone3", MetricSpace.hilbert_cone(3)), ("ellipse", ELLIPSE), ("poincare", POINC)):
        rep = check_condition_C(space, 100_000, seed=3, tol=1e-9)
        out.append(f"{name} worst {rep.margins['worst']:.1e}")
        assert rep.verdict == SUPPORTED_WITHIN_BUDGET, f"{name}: {rep.margins}"
    record_property("measured", ", ".join(out))


@pytest.mark.criterion(4, "classical Denjoy-Wolff for (z + 1/2)/(1 + z/2)")
def test_classical_denjoy_wolff(record_property):
    f = MobiusDisc(-0.5, 0.0)
    axis = np.linspace(-0.6, 0.6, 10)
    starts = np.array([[a, b] for a in axis for b in axis])
    rep = denjoy_wolff_estimate(f, POINC, starts, 200)
    finals = np.array([complex(*p) for p in rep.finals])
    assert np.max(np.abs(finals - 1.0)) <= 1e-3
    assert abs(complex(*rep.point) - 1.0) <= 1e-3
    assert rep.uniformity < 1e-3
    # matrix-power oracle for an orbit that stays representable
    k = min(rep.steps)
    assert abs(complex(*iterate(f, POINC, starts[0], k).points[-1]) - mobius_power_orbit(-0.5, 0.0, complex(*starts[0]), k)) <= 1e-12
    assert abs(f.derivative(1.0)) == pytest.approx(1 / 3)
    record_property("measured", f"uniformity = {rep.uniformity:.1e}")


@pytest.mark.criterion(5, "Hilbert Denjoy-Wolff for the boost on the disc and on x^2/4 + y^2 < 1")
def test_hilbert_denjoy_wolff(record_property):
    disc = denjoy_wolff_estimate(KleinIsometry.boost(0.3), DISC, GRID5, 5000)
    assert np.linalg.norm(disc.point - [1.0, 0.0]) <= 1e-4
    assert disc.uniformity <= 1e-4
    f = KleinIsometry(conjugate_projective(boost_matrix(0.3), np.diag([2.0, 1.0])))
    ell = denjoy_wolff_estimate(f, ELLIPSE, GRID5 * [2.0, 1.0], 5000)
    assert np.linalg.norm(ell.point - [2.0, 0.0]) <= 1e-4
    assert ell.uniformity <= 1e-4
    assert max(disc.steps + ell.steps) <= 5000
    record_property("measured", f"disc {disc.uniformity:.1e}, ellipse {ell.uniformity:.1e}")


@pytest.mark.criterion(6, "bounded or escaping dichotomy over the map library")
def test_library_dichotomy(record_property):
    th = Thresholds(n_max=100_000)
    verdicts = []
    for entry in standard_library():
        try:
            orbit, c = classify_from(entry.fmap, entry.space, entry.start, th)
        except UndecidedWithinBudget as exc:
            pytest.fail(f"{entry.name}: undecided ({exc})")
        assert c.verdict in (BOUNDED, ESCAPING)
        assert c.verdict.lower() == entry.expected, entry.name
        assert calka_consistent(orbit, th), entry.name
        verdicts.append(f"{entry.name}={c.verdict[0]}")
    record_property("measured", " ".join(verdicts))


@pytest.mark.criterion(7, "Perron point and asymptotic centre for [[2,1],[1,1]]")
def test_perron_branch(record_property):
    a = np.array([[2.0, 1.0], [1.0, 1.0]])
    cone = MetricSpace.hilbert_cone(2)
    orbit = iterate(MatrixProjective(a), cone, [0.5, 0.5], 200)
    v = perron_point(a)
    err = float(np.max(np.abs(orbit.points[-1] - v)))
    assert err <= 1e-10
    res = asymptotic_center(cone, orbit)
    assert np.max(np.abs(res.center - v)) <= res.spacing
    record_property("measured", f"orbit error {err:.1e}, centre error {np.max(np.abs(res.center - v)):.1e}")


@pytest.mark.criterion(8, "horoball witness, boost invariance and shrinking big horoballs")
def test_horoball_suite(record_property):
    xi, z0 = np.array([1.0, 0.0]), np.zeros(2)
    for r in (1.0, 2.0, 4.0):
        w = horoball_witness(DISC, xi, z0, r)
        assert busemann_estimate(DISC, xi, z0, w).lo <= -r + 0.01
    inv = invariance_check(KleinIsometry.boost(0.3), DISC, xi, z0, 0.0, k=10, samples=200, tol=1e-3)
    assert inv.violations == 0
    rng = np.random.default_rng(8)
    reach = []
    for j in range(5):
        pts = horoball_sample(DISC, xi, z0, -(2.0**j), 100, rng, which="big")
        reach.append(float(np.linalg.norm(pts - xi, axis=1).max()))
    assert np.all(np.diff(reach) < 0), reach
    record_property("measured", "F reach " + ", ".join(f"{v:.1e}" for v in reach))


@pytest.mark.criterion(9, "axiom harness: strictly convex bodies pass, the square fails")
def test_axiom_harness(record_property):
    for name, space in (("ellipse", ELLIPSE), ("p4", P4)):
        bp = check_condition_Bprime(space, 10_000, seed=9)
        a4 = check_axiom4(space, 10_000, seed=9)
        assert bp.verdict == SUPPORTED_WITHIN_BUDGET, name
        assert a4.verdict == SUPPORTED_WITHIN_BUDGET, name
    a4 = check_axiom4(SQUARE, 10_000, seed=9)
    assert a4.verdict == REFUTED
    assert a4.witness["value"] <= 5.0
    assert np.linalg.norm(a4.witness["xi"] - a4.witness["eta"]) > 0.1
    up = [-1.0, 0.0]
    b = check_condition_B(
        SQUARE,
        approach_sequence(SQUARE, [1.0, -0.5], direction=up),
        approach_sequence(SQUARE, [1.0, 0.5], direction=up),
    )
    assert b.verdict == REFUTED
    record_property("measured", f"square sup d = {a4.witness['value']:.3f}, B final = {b.margins['final']:.1f}")


@pytest.mark.criterion(10, "Gromov suite: disc delta, square growth, boost convergence, ray limits")
def test_gromov_suite(record_property):
    est = delta_estimate(DISC, 100_000, seed=10)
    assert est.delta_hat <= 1.1 * DELTA_DISC
    square = [delta_at_depth(SQUARE, k, 20_000, seed=10).delta_hat for k in range(4, 11)]
    assert np.all(np.diff(square) > 0), square
    conv = orbit_gromov_convergence(KleinIsometry.boost(0.3), DISC, [0.0, 0.0], n=400, slack=1e-6)
    assert conv.holds and conv.pairs_checked > 0
    (lim,) = geodesic_ray_limit(DISC, np.zeros(2), zigzag(), [2.0], tail_from=20)
    assert lim.tail_diameter < 0.05
    record_property(
        "measured",
        f"disc delta {est.delta_hat:.4f} <= {1.1 * DELTA_DISC:.4f}, square k=10 {square[-1]:.2f}, "
        f"zigzag tail {lim.tail_diameter:.1e}",
    )


@pytest.mark.criterion(11, "determinism and exit status")
def test_determinism_and_exit_status(tmp_path, record_property):
    cfg = {
        "seed": 11,
        "space": {"kind": "hilbert_body", "body": {"type": "ball"}},
        "map": {"type": "boost", "s": 0.3},
        "experiment": {
            "kind": "dw",
            "starts": {"grid": {"lower": [-0.5, -0.5], "upper": [0.5, 0.5], "size": 5}},
            "n": 2000,
        },
    }
    path = tmp_path / "dw.json"
    path.write_text(json.dumps(cfg))
    outs = []
    for tag in ("first", "second"):
        assert main(["dw", "--config", str(path), "--out-dir", str(tmp_path / tag)]) == 0
        outs.append(tuple((tmp_path / tag / f).read_bytes() for f in ("report.json", "orbits.csv")))
    assert outs[0] == outs[1]
    bad = {
        "seed": 11,
        "space": {"kind": "hilbert_body", "body": {"type": "box", "lower": [-1, -1], "upper": [1, 1]}},
        "experiment": {"kind": "axioms", "checks": ["Bprime", "axiom4"], "trials": 1000},
    }
    bpath = tmp_path / "square.json"
    bpath.write_text(json.dumps(bad))
    code = main(["axioms", "--config", str(bpath), "--out-dir", str(tmp_path / "square")])
    assert code != 0
    record_property("measured", f"square axioms exit {code}")
