"""Busemann-type estimates and horoball membership.

For a boundary point ``xi`` and a pole ``z0`` the function
``g(w) = d(y, w) - d(w, z0)`` is followed as ``w`` runs out toward ``xi``
along a geodesic ray, plus a few rays started from random interior
waypoints.  The tail minimum and maximum stand in for the lower and upper
limits over all approach sequences.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NoSamplesFound, NotOnBoundary, ParameterOutOfRange, PreconditionNotMet
from .geometry import EPS_BND, REPRESENTABLE_DEPTH
from .maps import apply_map, nonexpansive_probe
from .metrics import distance, geodesic_point, ray_toward

DEFAULT_TOL = 1e-3


@dataclass(frozen=True)
class Schedule:
    steps: int = 64
    dt: float = 0.5
    jitter: int = 8
    # waypoints are drawn with norm radius fraction uniform on [0, spread)
    spread: float = 0.5
    seed: int = 0


@dataclass(frozen=True)
class BusemannEstimate:
    lo: float | np.ndarray
    hi: float | np.ndarray
    schedule: Schedule
    # arclengths actually used on the radial ray; points the floating-point
    # grid cannot separate from the boundary are dropped
    radial_arclengths: np.ndarray = field(repr=False, default=None)


def _check_boundary(space, xi):
    xi = np.asarray(xi, dtype=float)
    if space.domain.boundary_residual(xi) > EPS_BND:
        raise NotOnBoundary(f"{xi} is not on the boundary")
    return xi


def approach_rays(space, xi, z0, schedule=Schedule()):
    """Ray samples toward ``xi``: the radial ray from ``z0`` first, then jittered rays.

    Returns a list of ``(arclengths, points)`` pairs.
    """
    xi = _check_boundary(space, xi)
    z0 = np.asarray(z0, dtype=float)
    t = schedule.dt * np.arange(1, schedule.steps + 1)
    rng = np.random.default_rng(schedule.seed)
    origins = [z0]
    if schedule.jitter:
        radial = rng.uniform(0.0, schedule.spread, schedule.jitter)
        origins.extend(space.domain.sample_interior(rng, schedule.jitter, radial=radial))
    rays = []
    for v in origins:
        pts = ray_toward(space, v, xi)(t)
        keep = space.domain.depth(pts) >= REPRESENTABLE_DEPTH
        # depth shrinks monotonically along a ray; keep the leading run
        n_keep = int(np.argmin(keep)) if not keep.all() else len(keep)
        rays.append((t[:n_keep], pts[:n_keep]))
    return rays


def busemann_estimate(space, xi, z0, y, schedule=Schedule(), rays=None):
    """Tail range of ``d(y, w) - d(w, z0)`` as ``w`` approaches ``xi``.

    ``y`` may be one point or a stack of points; ``lo``/``hi`` follow suit.
    Precomputed ``rays`` from ``approach_rays`` may be passed to amortise
    many queries.
    """
    z0 = np.asarray(z0, dtype=float)
    y = np.asarray(y, dtype=float)
    single = y.ndim == 1
    ys = np.atleast_2d(y)
    if rays is None:
        rays = approach_rays(space, xi, z0, schedule)
    lo = np.full(len(ys), np.inf)
    hi = np.full(len(ys), -np.inf)
    for _, pts in rays:
        if len(pts) == 0:
            continue
        tail = pts[-max(1, len(pts) // 4):]
        w = np.broadcast_to(tail[None], (len(ys),) + tail.shape)
        yy = np.broadcast_to(ys[:, None], w.shape)
        g = distance(space, yy, w, guard=0.0) - distance(space, w, np.broadcast_to(z0, w.shape), guard=0.0)
        g = np.atleast_2d(g)
        lo = np.minimum(lo, g.min(axis=1))
        hi = np.maximum(hi, g.max(axis=1))
    if not np.all(np.isfinite(lo)):
        raise PreconditionNotMet("no representable approach points toward the boundary point")
    radial_t = rays[0][0]
    if single:
        return BusemannEstimate(float(lo[0]), float(hi[0]), schedule, radial_t)
    return BusemannEstimate(lo, hi, schedule, radial_t)


def in_small_horoball(space, xi, z0, r, y, tol=DEFAULT_TOL, schedule=Schedule()):
    return busemann_estimate(space, xi, z0, y, schedule).hi <= r + tol


def in_big_horoball(space, xi, z0, r, y, tol=DEFAULT_TOL, schedule=Schedule()):
    return busemann_estimate(space, xi, z0, y, schedule).lo <= r + tol


def horoball_witness(space, xi, z0, r, schedule=Schedule()):
    """Point at distance ``r`` from ``z0`` toward a far point of the ray to ``xi``.

    It lies in the big horoball of radius ``-r``.
    """
    if r < 0:
        raise ParameterOutOfRange("witness radius must be nonnegative")
    z0 = np.asarray(z0, dtype=float)
    if r == 0:
        return z0.copy()
    t, pts = approach_rays(space, xi, z0, Schedule(schedule.steps, schedule.dt, 0))[0]
    if len(t) == 0 or r > t[-1]:
        raise ParameterOutOfRange(f"radius {r} exceeds the reachable arclength along the ray")
    return geodesic_point(space, z0, pts[-1], r, guard=0.0)


def horoball_sample(space, xi, z0, r, count, rng, which="small", center=None, radius=None,
                    max_tries=None, schedule=Schedule(), batch=256):
    """Rejection sample of horoball members from a norm ball.

    The ball is centred at ``center`` (default: the witness for ``max(-r, 0)``)
    with norm radius ``radius`` (default: that centre's distance to ``xi``).
    ``which`` selects the small (``hi <= r``) or big (``lo <= r``) horoball.
    """
    xi = _check_boundary(space, xi)
    if center is None:
        center = horoball_witness(space, xi, z0, max(-r, 0.0), schedule)
    center = np.asarray(center, dtype=float)
    if radius is None:
        radius = float(np.linalg.norm(center - xi))
    max_tries = 50 * count if max_tries is None else max_tries
    rays = approach_rays(space, xi, z0, schedule)
    found, tries = [], 0
    while len(found) < count and tries < max_tries:
        m = min(batch, max_tries - tries)
        tries += m
        dirs = rng.standard_normal((m, space.dim))
        if space.kind in ("hilbert_cone", "thompson_cone"):
            dirs -= dirs.mean(axis=1, keepdims=True)
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        cand = center + radius * rng.uniform(0, 1, (m, 1)) ** (1.0 / max(space.dim - 1, 1)) * dirs
        cand = cand[space.domain.depth(cand) > REPRESENTABLE_DEPTH]
        if len(cand) == 0:
            continue
        est = busemann_estimate(space, xi, z0, cand, schedule, rays=rays)
        val = est.hi if which == "small" else est.lo
        found.extend(cand[np.asarray(val) <= r])
    if len(found) < count:
        raise NoSamplesFound(f"{len(found)} of {count} members found in {tries} proposals")
    return np.array(found[:count])


@dataclass(frozen=True)
class InvarianceReport:
    samples: int
    powers: list
    violations: int
    worst_excess: float
    witness: tuple | None


def invariance_check(fmap, space, xi, z0, r, k=10, samples=200, tol=DEFAULT_TOL, seed=0,
                     schedule=Schedule(), probe_trials=500):
    """Images of small-horoball members under ``f, ..., f^k`` stay in the big horoball."""
    if probe_trials:
        probe = nonexpansive_probe(fmap, space, trials=probe_trials, seed=seed)
        if not probe.nonexpansive:
            raise PreconditionNotMet(f"map is not nonexpansive: excess {probe.worst_violation:.3g}")
    rng = np.random.default_rng(seed)
    members = horoball_sample(space, xi, z0, r, samples, rng, "small", schedule=schedule)
    rays = approach_rays(space, xi, z0, schedule)
    violations, worst, witness = 0, -np.inf, None
    images = members.copy()
    for j in range(1, k + 1):
        images = np.array([apply_map(fmap, space, x) for x in images])
        lo = np.asarray(busemann_estimate(space, xi, z0, images, schedule, rays=rays).lo)
        excess = lo - r
        bad = excess > tol
        violations += int(bad.sum())
        i = int(np.argmax(excess))
        if excess[i] > worst:
            worst = float(excess[i])
            witness = (members[i], j, images[i])
    return InvarianceReport(samples, list(range(1, k + 1)), violations, worst, witness)
