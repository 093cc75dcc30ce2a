"""Picard iteration and orbit diagnostics.

Orbits stop early once an iterate comes within ``REPRESENTABLE_DEPTH`` of the
boundary: past that point double precision can no longer tell the iterate
from its boundary limit, and metric values stop being meaningful.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DisagreeingLimits,
    ImageEscapedDomain,
    MixedVerdicts,
    PointOutsideDomain,
    PreconditionNotMet,
    UndecidedWithinBudget,
)
from .geometry import REPRESENTABLE_DEPTH, segment_in_boundary
from .maps import apply_map
from .metrics import distance

BOUNDED = "Bounded"
ESCAPING = "Escaping"


@dataclass(frozen=True)
class Thresholds:
    r_bound: float = 50.0
    d_escape: float = 25.0
    warmup: int = 100
    window: int = 50
    n_max: int = 100_000
    # norm tolerance for "the tail clusters at one boundary point"
    cluster_tol: float = 1e-3
    # growth of the running maximum of dists between the two halves of the
    # orbit: at least escape_growth signals escape, at most settle_growth
    # signals a settled bounded orbit
    escape_growth: float = 0.1
    settle_growth: float = 1e-3


@dataclass
class Orbit:
    start: np.ndarray
    points: np.ndarray
    base: np.ndarray
    dists: np.ndarray
    halted: bool = False
    # d(x0, f x0): bounds every step of a nonexpansive orbit
    step_size: float = 0.0

    def __len__(self):
        return len(self.points)

    @property
    def steps(self):
        return len(self.points) - 1


def _advance(fmap, space, pts, n):
    halted = False
    x = pts[-1]
    for _ in range(n):
        try:
            x = apply_map(fmap, space, x)
        except ImageEscapedDomain:
            halted = True
            break
        if space.domain.depth(x) < REPRESENTABLE_DEPTH:
            halted = True
            break
        pts.append(x)
    return halted


def iterate(fmap, space, x0, n, base=None):
    """Orbit ``x0, f(x0), ..., f^n(x0)`` with distances to the base point.

    ``halted`` is set when the orbit stopped early at the representable
    boundary.
    """
    x0 = np.asarray(x0, dtype=float)
    base = space.base_point if base is None else np.asarray(base, dtype=float)
    if not space.domain.depth(x0) >= REPRESENTABLE_DEPTH:
        raise PointOutsideDomain("orbit start must be interior")
    if n < 1:
        raise ValueError("n must be >= 1")
    pts = [x0]
    halted = _advance(fmap, space, pts, n)
    pts = np.array(pts)
    dists = np.asarray(distance(space, pts, np.broadcast_to(base, pts.shape), guard=0.0))
    step = float(distance(space, pts[0], pts[1], guard=0.0)) if len(pts) > 1 else 0.0
    return Orbit(x0, pts, base, np.atleast_1d(dists), halted, step)


def extend(orbit, fmap, space, n):
    """Continue ``orbit`` by up to ``n`` further steps."""
    if orbit.halted:
        return orbit
    pts = [orbit.points[-1]]
    halted = _advance(fmap, space, pts, n)
    new = np.array(pts[1:]).reshape(-1, space.dim)
    d = np.asarray(distance(space, new, np.broadcast_to(orbit.base, new.shape), guard=0.0)) if len(new) else np.empty(0)
    return Orbit(
        orbit.start,
        np.vstack([orbit.points, new]),
        orbit.base,
        np.concatenate([orbit.dists, np.atleast_1d(d)]),
        halted,
        orbit.step_size,
    )


@dataclass(frozen=True)
class OrbitClassification:
    verdict: str
    radius: float | None = None
    dw_estimate: np.ndarray | None = None
    residual: float | None = None
    evidence: dict = field(default_factory=dict)


def _radial_projection(space, base, p):
    d = p - base
    if np.linalg.norm(d) == 0:
        return None
    t = float(space.domain.exit_time(base, d))
    return base + t * d


def _growth(dists):
    half = len(dists) // 2
    if half == 0:
        return 0.0
    return float(dists[half:].max() - dists[:half].max())


def classify_orbit(orbit, thresholds=Thresholds(), space=None):
    """Bounded / Escaping verdict for a finite orbit.

    ``space`` is needed to project the tail onto the boundary; it may be
    omitted only for orbits that are to be tested for boundedness alone.
    Raises ``UndecidedWithinBudget`` when neither verdict is supported.
    """
    th = thresholds
    pts, dists = orbit.points, orbit.dists
    n_pts = len(pts)
    tail_len = min(th.window, max(1, n_pts // 4))
    tail = pts[-tail_len:]
    growth = _growth(dists)
    evidence = {
        "length": n_pts,
        "halted": orbit.halted,
        "last_dist": float(dists[-1]),
        "growth": growth,
        "tail_length": tail_len,
    }
    climbing = orbit.halted or dists[-1] >= th.d_escape or growth >= th.escape_growth
    if climbing and space is not None:
        xi = _radial_projection(space, orbit.base, tail.mean(axis=0))
        if xi is not None:
            residual = float(np.linalg.norm(tail - xi, axis=1).max())
            evidence["tail_residual"] = residual
            if residual <= th.cluster_tol:
                return OrbitClassification(ESCAPING, dw_estimate=xi, residual=residual, evidence=evidence)
    if n_pts >= th.warmup + th.window:
        radius = float(dists[-th.window:].max())
        if radius <= th.r_bound and growth <= th.settle_growth:
            return OrbitClassification(BOUNDED, radius=radius, evidence=evidence)
    raise UndecidedWithinBudget(f"orbit of length {n_pts} is inconclusive: {evidence}")


def classify_from(fmap, space, x0, thresholds=Thresholds()):
    """Iterate from ``x0`` with a doubling budget until the orbit is classified."""
    th = thresholds
    n = th.warmup + th.window
    orbit = iterate(fmap, space, x0, n)
    while True:
        try:
            return orbit, classify_orbit(orbit, th, space)
        except UndecidedWithinBudget:
            if orbit.halted or orbit.steps >= th.n_max:
                raise
            extra = min(orbit.steps, th.n_max - orbit.steps)
            orbit = extend(orbit, fmap, space, extra)


def calka_consistent(orbit, thresholds=Thresholds()):
    """No bounded window past warm-up followed by a re-escape.

    Once a window of length ``window`` past ``warmup`` dips to ``r_bound``,
    every later distance must stay within ``r_bound + 2 * d(x0, f x0)``.
    """
    th = thresholds
    d = orbit.dists
    for i in range(th.warmup, len(d) - th.window + 1):
        if d[i:i + th.window].min() <= th.r_bound:
            return bool(d[i:].max() <= th.r_bound + 2.0 * orbit.step_size + 1e-12)
    return True


def monotone_escape_subsequence(dists):
    """Indices of the running strict maxima of ``dists``."""
    if isinstance(dists, Orbit):
        dists = dists.dists
    out = []
    best = -np.inf
    for i, v in enumerate(dists):
        if v > best:
            out.append(i)
            best = v
    return out


# ---------------------------------------------------------------------------
# Denjoy-Wolff limits


@dataclass(frozen=True)
class DenjoyWolffReport:
    point: np.ndarray
    uniformity: float
    spread: float
    estimates: np.ndarray
    finals: np.ndarray
    steps: list


def denjoy_wolff_estimate(fmap, space, starts, n, tol=1e-3, thresholds=Thresholds()):
    """Common boundary limit of the orbits from ``starts`` after ``n`` steps.

    ``uniformity`` is the largest norm distance from a final iterate to the
    estimate; ``spread`` the largest distance from a per-start estimate.
    """
    starts = np.atleast_2d(np.asarray(starts, dtype=float))
    estimates, finals, steps, verdicts = [], [], [], []
    for x0 in starts:
        orbit = iterate(fmap, space, x0, n)
        c = classify_orbit(orbit, thresholds, space)
        verdicts.append(c.verdict)
        if c.verdict == ESCAPING:
            estimates.append(c.dw_estimate)
        finals.append(orbit.points[-1])
        steps.append(orbit.steps)
    if any(v != ESCAPING for v in verdicts):
        raise MixedVerdicts(f"{verdicts.count(BOUNDED)} of {len(verdicts)} starts have bounded orbits")
    estimates = np.array(estimates)
    xi = _radial_projection(space, space.base_point, estimates.mean(axis=0))
    spread = float(np.linalg.norm(estimates - xi, axis=1).max())
    if spread > tol:
        raise DisagreeingLimits(f"per-start limits differ by {spread:.3g} > {tol:g}")
    finals = np.array(finals)
    uniformity = float(np.linalg.norm(finals - xi, axis=1).max())
    return DenjoyWolffReport(xi, uniformity, spread, estimates, finals, steps)


def uniformity_curve(fmap, space, starts, n, xi):
    """``max_j |f^k(x_j) - xi|`` for ``k = 0..n``; halted orbits hold their last iterate."""
    curves = []
    for x0 in np.atleast_2d(starts):
        orbit = iterate(fmap, space, x0, n)
        err = np.linalg.norm(orbit.points - xi, axis=1)
        pad = np.full(n + 1 - len(err), err[-1])
        curves.append(np.concatenate([err, pad]))
    return np.max(curves, axis=0)


# ---------------------------------------------------------------------------
# Attractor


@dataclass(frozen=True)
class AttractorSample:
    points: np.ndarray
    tail_diameters: np.ndarray
    escaping: bool
    unresolved: list


def attractor_sample(fmap, space, starts, n, eps_acc=1e-3, thresholds=Thresholds()):
    """Norm-limit representatives of the orbits from ``starts``.

    Escaping orbits contribute their boundary estimate; starts whose tails
    have not settled to within ``eps_acc`` are listed as unresolved.
    """
    reps, diams, unresolved, verdicts = [], [], [], []
    for i, x0 in enumerate(np.atleast_2d(starts)):
        orbit = iterate(fmap, space, x0, n)
        tail = orbit.points[-min(thresholds.window, max(1, len(orbit) // 4)):]
        diam = float(np.max(np.linalg.norm(tail[:, None] - tail[None], axis=-1)))
        try:
            c = classify_orbit(orbit, thresholds, space)
            verdicts.append(c.verdict)
        except UndecidedWithinBudget:
            c = None
            verdicts.append(None)
        if diam > eps_acc:
            unresolved.append(i)
            continue
        reps.append(c.dw_estimate if c is not None and c.verdict == ESCAPING else orbit.points[-1])
        diams.append(diam)
    escaping = bool(verdicts) and all(v == ESCAPING for v in verdicts)
    return AttractorSample(np.array(reps).reshape(-1, space.dim), np.array(diams), escaping, unresolved)


@dataclass(frozen=True)
class HullVerdict:
    verdict: str  # "Consistent", "CounterexampleFound" or "NotApplicable"
    pairs_checked: int
    witness: tuple | None = None


def hull_boundary_check(sample, body, same_tol=1e-9):
    """Whether pairwise segments between sampled attractor points stay in the boundary."""
    if not sample.escaping or len(sample.points) == 0:
        return HullVerdict("NotApplicable", 0)
    pts = sample.points
    checked = 0
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            checked += 1
            if np.linalg.norm(pts[i] - pts[j]) <= same_tol:
                continue
            if not segment_in_boundary(body, pts[i], pts[j]):
                return HullVerdict("CounterexampleFound", checked, (pts[i], pts[j]))
    return HullVerdict("Consistent", checked)


# ---------------------------------------------------------------------------
# Asymptotic centre


@dataclass(frozen=True)
class AsymptoticCenterResult:
    center: np.ndarray
    radius: float
    spacing: float
    grid_points: int


def _grid(space, lo, hi, m):
    if space.kind in ("hilbert_cone", "thompson_cone"):
        axes = [np.linspace(lo[j], hi[j], m) for j in range(space.dim - 1)]
        mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, space.dim - 1)
        pts = np.c_[mesh, 1.0 - mesh.sum(axis=1)]
    else:
        axes = [np.linspace(lo[j], hi[j], m) for j in range(space.dim)]
        pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, space.dim)
    depth = space.domain.depth(pts)
    return pts[depth > 1e-6]


def _tail_radius(space, grid, seq):
    g = np.repeat(grid[:, None, :], len(seq), axis=1)
    s = np.broadcast_to(seq[None], g.shape)
    return np.asarray(distance(space, g, s, guard=0.0)).max(axis=1)


def asymptotic_center(space, sequence, grid=41, thresholds=Thresholds()):
    """Grid minimiser of ``max_n d(x, x_n)`` over the sequence tail, refined once."""
    if isinstance(sequence, Orbit):
        c = classify_orbit(sequence, thresholds, space)
        if c.verdict != BOUNDED:
            raise PreconditionNotMet("asymptotic centre of an unbounded orbit")
        seq = sequence.points[-thresholds.window:]
    else:
        seq = np.atleast_2d(np.asarray(sequence, dtype=float))
    lo, hi = space.domain.bounding_box()
    spacing = float(np.max(hi - lo)) / (grid - 1)
    pts = _grid(space, lo, hi, grid)
    total = len(pts)
    rad = _tail_radius(space, pts, seq)
    best = pts[int(np.argmin(rad))]
    free = best[: space.dim - 1] if space.kind in ("hilbert_cone", "thompson_cone") else best
    pts = _grid(space, free - spacing, free + spacing, grid)
    pts = np.vstack([pts, best])
    total += len(pts)
    rad = _tail_radius(space, pts, seq)
    k = int(np.argmin(rad))
    return AsymptoticCenterResult(pts[k], float(rad[k]), 2 * spacing / (grid - 1), total)
