"""Gromov products, four-point defects and orbit convergence diagnostics.

Every function here reaches the metric through ``space.distance`` so that a
wrapper (for example a rescaled metric) can stand in for a ``MetricSpace``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dynamics import ESCAPING, Thresholds, classify_orbit, iterate, monotone_escape_subsequence
from .errors import NotEscaping, PreconditionNotMet
from .geometry import REPRESENTABLE_DEPTH

GUARD = 0.0


def _d(space, x, y):
    x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
    return np.asarray(space.distance(x, y, guard=GUARD))


def gromov_product(space, x, y, w):
    """``(x, y)_w = (d(x, w) + d(y, w) - d(x, y)) / 2``."""
    val = 0.5 * (_d(space, x, w) + _d(space, y, w) - _d(space, x, y))
    return float(val) if np.ndim(val) == 0 else val


class ScaledMetric:
    """A space whose distances are multiplied by ``factor``; everything else is delegated."""

    def __init__(self, space, factor):
        self._space = space
        self.factor = float(factor)

    def __getattr__(self, name):
        return getattr(self._space, name)

    def distance(self, x, y, guard=GUARD):
        return self.factor * np.asarray(self._space.distance(x, y, guard=guard))


# ---------------------------------------------------------------------------
# Four-point defect


@dataclass(frozen=True)
class DeltaEstimate:
    delta_hat: float
    quadruples: int
    worst: np.ndarray | None
    schedule: str


def boundary_biased(space, rng, size, ks=range(1, 11)):
    """Points at norm-radius fraction ``1 - 2**-k`` along random rays from the centre."""
    ks = np.asarray(list(ks))
    k = rng.choice(ks, size)
    return space.domain.sample_interior(rng, size, radial=1.0 - np.exp2(-k.astype(float)))


def four_point_defect(space, x, y, z, w):
    """``min((x, z)_w, (y, z)_w) - (x, y)_w`` clamped at zero, vectorised."""
    dxw, dyw, dzw = _d(space, x, w), _d(space, y, w), _d(space, z, w)
    dxy, dxz, dyz = _d(space, x, y), _d(space, x, z), _d(space, y, z)
    xz = 0.5 * (dxw + dzw - dxz)
    yz = 0.5 * (dyw + dzw - dyz)
    xy = 0.5 * (dxw + dyw - dxy)
    return np.maximum(np.minimum(xz, yz) - xy, 0.0)


def delta_estimate(space, quadruples=100_000, seed=0, sampler=None, block=10_000,
                   schedule="radius 1-2^-k, k uniform on 1..10"):
    """Largest sampled four-point defect: a lower bound on the hyperbolicity constant.

    Quadruples are drawn in fixed-size blocks from one stream, so the
    estimate for ``N`` quadruples is a running maximum over a prefix of the
    estimate for any larger ``N``.
    """
    if quadruples < 1:
        raise ValueError("need at least one quadruple")
    sampler = boundary_biased if sampler is None else sampler
    rng = np.random.default_rng(seed)
    best, worst, done = 0.0, None, 0
    while done < quadruples:
        pts = sampler(space, rng, 4 * block).reshape(block, 4, space.dim)
        use = min(block, quadruples - done)
        pts = pts[:use]
        defect = four_point_defect(space, pts[:, 0], pts[:, 1], pts[:, 2], pts[:, 3])
        i = int(np.argmax(defect))
        if defect[i] > best:
            best, worst = float(defect[i]), pts[i].copy()
        done += use
    return DeltaEstimate(best, quadruples, worst, schedule)


def delta_at_depth(space, k, quadruples=20_000, seed=0):
    """Defect estimate with every sample at norm-radius fraction ``1 - 2**-k``."""
    def sampler(space, rng, size):
        return space.domain.sample_interior(rng, size, radial=np.full(size, 1.0 - 2.0**-k))

    return delta_estimate(space, quadruples, seed, sampler, schedule=f"radius 1-2^-{k}")


# ---------------------------------------------------------------------------
# Orbit convergence in the Gromov sense


@dataclass(frozen=True)
class OrbitGromovReport:
    indices: list
    pairs_checked: int
    violations: int
    worst_margin: float
    band_minima: list
    witness: tuple | None = None

    @property
    def holds(self):
        return self.violations == 0


def orbit_gromov_convergence(fmap, space, x0, w=None, n=400, slack=1e-6, thresholds=Thresholds()):
    """Check ``(f^k x0, f^p x0)_w >= d(f^k x0, x0) / 2 - d(w, x0) - slack`` at record times ``p``.

    ``p`` runs over the record times of ``d(f^p x0, x0)`` and ``k`` over all
    earlier indices.  ``band_minima[m]`` is the smallest product between
    record-time iterates with both indices at least ``m`` along the record
    list; it should grow without bound for an escaping orbit.
    """
    x0 = np.asarray(x0, dtype=float)
    w = x0 if w is None else np.asarray(w, dtype=float)
    orbit = iterate(fmap, space, x0, n, base=x0)
    if classify_orbit(orbit, thresholds, space).verdict != ESCAPING:
        raise NotEscaping("orbit does not escape")
    pts = orbit.points
    d0 = orbit.dists
    shift = float(_d(space, w, x0))
    phi = monotone_escape_subsequence(d0)
    checked, violations, worst, witness = 0, 0, np.inf, None
    for p in phi:
        ks = np.arange(0, p + 1)
        prod = np.atleast_1d(gromov_product(space, pts[ks], np.broadcast_to(pts[p], pts[ks].shape), w))
        margin = prod - (0.5 * d0[ks] - shift - slack)
        checked += len(ks)
        bad = margin < 0
        violations += int(bad.sum())
        i = int(np.argmin(margin))
        if margin[i] < worst:
            worst = float(margin[i])
            witness = (int(ks[i]), int(p))
    rec = pts[phi]
    m = len(phi)
    band = []
    if m >= 2:
        ii, jj = np.triu_indices(m, 1)
        prods = np.atleast_1d(gromov_product(space, rec[ii], rec[jj], w))
        for start in range(m - 1):
            band.append(float(prods[ii >= start].min()))
    return OrbitGromovReport(phi, checked, violations, worst, band, witness)


# ---------------------------------------------------------------------------
# Geodesic ray limits


def zigzag(n_max=40):
    """``x_n = (1 - 2**-n) (cos t_n, (-1)**n sin t_n)`` with ``t_n = 2**(-n/2)``, approaching (1, 0)."""
    n = np.arange(1, n_max + 1)
    theta = np.exp2(-n / 2.0)
    sign = np.where(n % 2 == 0, 1.0, -1.0)
    return (1.0 - np.exp2(-n.astype(float)))[:, None] * np.c_[np.cos(theta), sign * np.sin(theta)]


def radial(xi, n_max=40):
    n = np.arange(1, n_max + 1)
    return (1.0 - np.exp2(-n.astype(float)))[:, None] * np.asarray(xi, dtype=float)


@dataclass(frozen=True)
class RayLimit:
    radius: float
    samples: np.ndarray
    used: list
    skipped: list
    tail_diameter: float


def geodesic_ray_limit(space, w, points, radii, tail_from=20):
    """Points at distance ``r`` from ``w`` toward each ``x_n`` and the diameter of their tail.

    The tail runs over sequence indices ``>= tail_from``.  Indices with
    ``d(w, x_n) < r`` or with ``x_n`` not representable are skipped.
    """
    w = np.asarray(w, dtype=float)
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    ok = space.domain.depth(pts) >= REPRESENTABLE_DEPTH
    out = []
    for r in radii:
        dist = np.where(ok, _d(space, w, np.where(ok[:, None], pts, w)), -np.inf)
        use = np.flatnonzero(ok & (dist >= r))
        skipped = [int(i) for i in np.flatnonzero(~(ok & (dist >= r)))]
        if len(use) == 0:
            raise PreconditionNotMet(f"no sequence point is at distance >= {r} from w")
        u = np.asarray(space.geodesic_point(np.broadcast_to(w, pts[use].shape), pts[use], r, guard=GUARD))
        tail = u[use >= tail_from]
        if len(tail) >= 2:
            ii, jj = np.triu_indices(len(tail), 1)
            diam = float(_d(space, tail[ii], tail[jj]).max())
        else:
            diam = 0.0
        out.append(RayLimit(float(r), u, [int(i) for i in use], skipped, diam))
    return out


# ---------------------------------------------------------------------------
# Busemann convexity


@dataclass(frozen=True)
class BusemannProbe:
    trials: int
    violations: int
    worst: float
    witness: dict | None = field(default=None)


def busemann_convexity_probe(space, trials=10_000, seed=0, tol=1e-8, sampler=None, batch=5_000):
    """Sampled check of ``d(z_a, z'_a) <= (1 - a) d(x, x') + a d(y, y')``.

    ``z_a`` is the point at fraction ``a`` of the way from ``x`` to ``y``
    along the geodesic, likewise ``z'_a``.  ``sampler(space, rng, m)``
    returns ``(x, y, x', y', a)`` batches; the default draws uniform
    interior points and fractions.
    """
    rng = np.random.default_rng(seed)
    if sampler is None:
        def sampler(space, rng, m):
            pts = [space.domain.sample_interior(rng, m) for _ in range(4)]
            return (*pts, rng.uniform(0.0, 1.0, m))
    worst, witness, violations, done = -np.inf, None, 0, 0
    while done < trials:
        m = min(batch, trials - done)
        x, y, xp, yp, a = sampler(space, rng, m)
        z = space.geodesic_point(x, y, a * _d(space, x, y), guard=GUARD)
        zp = space.geodesic_point(xp, yp, a * _d(space, xp, yp), guard=GUARD)
        excess = _d(space, z, zp) - ((1 - a) * _d(space, x, xp) + a * _d(space, y, yp))
        violations += int((excess > tol).sum())
        i = int(np.argmax(excess))
        if excess[i] > worst:
            worst = float(excess[i])
            witness = {"x": x[i], "y": y[i], "x2": xp[i], "y2": yp[i], "a": float(a[i]), "excess": worst}
        done += m
    return BusemannProbe(trials, violations, worst, witness if violations else None)


def flat_sampler(space, rng, m):
    """Segment pairs hugging one face of a box, where the Hilbert geometry is flattest."""
    lo, hi = space.domain.bounding_box()
    span = hi - lo
    depth = np.exp2(-rng.integers(2, 12, (m, 4)).astype(float))
    along = rng.uniform(0.1, 0.9, (m, 4))
    pts = []
    for j in range(4):
        p = np.empty((m, space.dim))
        p[:, 0] = hi[0] - depth[:, j] * span[0]
        p[:, 1] = lo[1] + along[:, j] * span[1]
        pts.append(p)
    return (*pts, rng.uniform(0.0, 1.0, m))
