"""Empirical checks of the boundary axioms and related conditions.

Divergence to infinity is read off level ladders: a quantity "tends to
infinity" along an approach schedule ``|x_k - xi| = 2**-k`` when its last
representable value clears every level in the ladder.  Checks that look
for counterexamples are refuters; a pass only means none was found within
the trial budget.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import PreconditionNotMet
from .geometry import EPS_BND, REPRESENTABLE_DEPTH, Polytope, SimplexSlice, segment_in_boundary
from .metrics import distance

SUPPORTED = "Supported"
SUPPORTED_WITHIN_BUDGET = "SupportedWithinBudget"
REFUTED = "Refuted"

K_MAX = 40
SEPARATION = 0.1
# extra halvings applied to y_k so that it runs out faster than x_k
MAX_DEPTH_OFFSET = 6


@dataclass(frozen=True, eq=False)
class ApproachSequence:
    """Interior points running straight into a boundary point."""

    target: np.ndarray
    points: np.ndarray
    ks: np.ndarray

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "target", np.asarray(self.target, dtype=float))
        gaps = np.linalg.norm(pts - self.target, axis=1)
        if len(pts) < 2 or np.any(np.diff(gaps) >= 0):
            raise PreconditionNotMet("approach sequence must get strictly closer to its target")

    def __len__(self):
        return len(self.points)


def approach_sequence(space, xi, direction=None, k_max=K_MAX, offset=0):
    """Points ``xi + 2**-(k + offset) * u`` for ``k = 1..k_max``.

    ``u`` is the unit vector from ``xi`` toward ``direction`` (default: the
    base point's direction).  Points the floating-point grid cannot tell
    from the boundary are dropped.
    """
    xi = np.asarray(xi, dtype=float)
    if space.domain.boundary_residual(xi) > EPS_BND:
        raise PreconditionNotMet(f"{xi} is not on the boundary")
    u = space.base_point - xi if direction is None else np.asarray(direction, dtype=float)
    u = u / np.linalg.norm(u)
    ks = np.arange(1, k_max + 1)
    pts = xi + np.exp2(-(ks + offset).astype(float))[:, None] * u
    keep = space.domain.depth(pts) >= REPRESENTABLE_DEPTH
    return ApproachSequence(xi, pts[keep], ks[keep])


@dataclass(frozen=True)
class AxiomReport:
    axiom: str
    verdict: str
    trials: int
    levels: tuple = ()
    margins: dict = field(default_factory=dict)
    witness: dict | None = None
    seed: int | None = None

    @property
    def refuted(self):
        return self.verdict == REFUTED

    def to_dict(self):
        def clean(v):
            if isinstance(v, np.ndarray):
                return v.tolist()
            if isinstance(v, dict):
                return {k: clean(x) for k, x in v.items()}
            if isinstance(v, (list, tuple)):
                return [clean(x) for x in v]
            if isinstance(v, np.generic):
                return v.item()
            return v

        return clean({
            "axiom": self.axiom,
            "verdict": self.verdict,
            "trials": self.trials,
            "levels": list(self.levels),
            "margins": self.margins,
            "witness": self.witness,
            "seed": self.seed,
        })


def _d(space, x, y):
    x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
    return np.asarray(distance(space, x, y, guard=0.0))


def _first_crossing(values, level, above=True):
    hit = values > level if above else values < -level
    return int(np.argmax(hit)) if hit.any() else None


def check_axiom1(space, sequences, w=None, levels=(5.0, 10.0)):
    """Distances to ``w`` clear every level along every approach sequence."""
    w = space.base_point if w is None else np.asarray(w, dtype=float)
    margins = {}
    for i, seq in enumerate(sequences):
        vals = _d(space, seq.points, w)
        margins[i] = {"final": float(vals[-1]), "crossings": [_first_crossing(vals, L) for L in levels]}
        if vals[-1] <= max(levels):
            return AxiomReport("axiom1", REFUTED, len(sequences), tuple(levels), margins,
                               {"sequence": i, "target": seq.target, "final": float(vals[-1])})
    return AxiomReport("axiom1", SUPPORTED, len(sequences), tuple(levels), margins)


def _paired(seq_x, seq_y):
    m = min(len(seq_x), len(seq_y))
    return seq_x.points[:m], seq_y.points[:m]


def check_condition_B(space, seq_x, seq_y, w=None, levels=(5.0, 10.0, 20.0)):
    """``d(x_k, y_k) - max(d(x_k, w), d(y_k, w))`` clears every level."""
    if np.linalg.norm(seq_x.target - seq_y.target) <= EPS_BND:
        raise PreconditionNotMet("condition (B) needs distinct boundary targets")
    w = space.base_point if w is None else np.asarray(w, dtype=float)
    x, y = _paired(seq_x, seq_y)
    gap = _d(space, x, y) - np.maximum(_d(space, x, w), _d(space, y, w))
    margins = {"final": float(gap[-1]), "min": float(gap.min()),
               "crossings": [_first_crossing(gap, L) for L in levels]}
    if gap[-1] > max(levels):
        return AxiomReport("condition_B", SUPPORTED, 1, tuple(levels), margins)
    witness = {"xi": seq_x.target, "eta": seq_y.target, "gap": gap}
    return AxiomReport("condition_B", REFUTED, 1, tuple(levels), margins, witness)


# ---------------------------------------------------------------------------
# Refuters


def _trial_rng(seed, i):
    return np.random.default_rng(np.random.SeedSequence([seed, i]))


def _face_pair(body, face, rng=None):
    """Two points of one polytope face, spread along a tangent direction."""
    n = body.normals[face]
    c = body.center
    foot = c + (body.offsets[face] - c @ n) * n
    if rng is None:
        t = np.zeros_like(n)
        t[int(np.argmin(np.abs(n)))] = 1.0
        frac = 0.5
    else:
        t = rng.standard_normal(len(n))
        frac = rng.uniform(0.2, 0.9)
    t -= (t @ n) * n
    if np.linalg.norm(t) < 1e-12:
        return None
    t /= np.linalg.norm(t)
    ahead = float(body.exit_time(foot, t))
    back = float(body.exit_time(foot, -t))
    if not (np.isfinite(ahead) and np.isfinite(back)):
        return None
    xi, eta = foot + frac * ahead * t, foot - frac * back * t
    return xi, eta, -n, -n


PAIR_CANDIDATES = 8


def _proposals(space, trials, seed, depth_offsets, start=0):
    """Per-trial boundary pairs, inward directions and depth offsets.

    Polytopes get one deterministic same-face proposal per face first;
    all other trials draw random boundary pairs at least ``SEPARATION``
    apart.  Every trial draws from its own stream so that any trial can be
    replayed in isolation.
    """
    body = space.domain
    faces = len(body.normals) if isinstance(body, Polytope) and body.dim >= 2 else 0
    out, rand_idx, rand_dirs, rand_offsets = [], [], [], []
    for i in range(start, trials):
        if i < faces:
            pair = _face_pair(body, i)
            if pair is None:
                continue
            xi, eta, ux, uy = pair
            out.append({"trial": i, "proposer": "same_face", "xi": xi, "eta": eta,
                        "dir_x": ux, "dir_y": uy, "offset": depth_offsets[1]})
            continue
        rng = _trial_rng(seed, i)
        rand_idx.append(i)
        rand_dirs.append(rng.standard_normal((PAIR_CANDIDATES, 2, body.dim)))
        rand_offsets.append(int(rng.integers(depth_offsets[0], depth_offsets[1] + 1)))
    if rand_idx:
        dirs = np.array(rand_dirs)
        dirs /= np.linalg.norm(dirs, axis=-1, keepdims=True)
        if isinstance(body, SimplexSlice):
            raise PreconditionNotMet("random boundary proposals need a body with a centre")
        ends = body.boundary_point(dirs)
        sep = np.linalg.norm(ends[:, :, 0] - ends[:, :, 1], axis=-1)
        for j, i in enumerate(rand_idx):
            ok = np.flatnonzero(sep[j] >= SEPARATION)
            if len(ok) == 0:
                continue
            xi, eta = ends[j, ok[0]]
            out.append({"trial": i, "proposer": "random", "xi": xi, "eta": eta,
                        "dir_x": space.base_point - xi, "dir_y": space.base_point - eta,
                        "offset": rand_offsets[j]})
    out.sort(key=lambda p: p["trial"])
    return out


def _seq_dir(space, xi, u, offset):
    u = np.asarray(u, dtype=float)
    u = u / np.linalg.norm(u)
    ks = np.arange(1, K_MAX + 1)
    return xi + np.exp2(-(ks + offset).astype(float))[:, None] * u


def _batch_points(space, props):
    """Stacked sequence pairs with a mask of the representable terms."""
    x = np.array([_seq_dir(space, p["xi"], p["dir_x"], 0) for p in props])
    y = np.array([_seq_dir(space, p["eta"], p["dir_y"], p["offset"]) for p in props])
    keep = (space.domain.depth(x) >= REPRESENTABLE_DEPTH) & (space.domain.depth(y) >= REPRESENTABLE_DEPTH)
    # masked terms are swapped for the base point so the batch stays finite
    x = np.where(keep[..., None], x, space.base_point)
    y = np.where(keep[..., None], y, space.base_point)
    return x, y, keep


def _refuter(name, space, trials, seed, offsets, score, levels, chunk=2000):
    best = None
    for lo in range(0, trials, chunk):
        props = _proposals(space, min(lo + chunk, trials), seed, offsets, start=lo)
        if not props:
            continue
        x, y, keep = _batch_points(space, props)
        values, refutes = score(space, x, y, keep)
        for j, prop in enumerate(props):
            if keep[j].sum() < 2:
                continue
            if best is None or values[j] < best:
                best = float(values[j])
            if refutes[j]:
                witness = dict(prop)
                witness["value"] = float(values[j])
                witness["points"] = int(keep[j].sum())
                return AxiomReport(name, REFUTED, prop["trial"] + 1, tuple(levels),
                                   {"best": float(values[j])}, witness, seed)
    return AxiomReport(name, SUPPORTED_WITHIN_BUDGET, trials, tuple(levels), {"best": best}, None, seed)


def _last_valid(values, keep):
    idx = keep.shape[1] - 1 - np.argmax(keep[:, ::-1], axis=1)
    return values[np.arange(len(values)), idx]


def check_condition_Bprime(space, trials=10_000, seed=0, levels=(5.0, 10.0, 20.0), w=None):
    """Search for pairs with distinct limits whose ``d(x_k, y_k) - d(y_k, w)`` runs to minus infinity."""
    if trials < 1:
        raise ValueError("trial budget must be >= 1")
    w = space.base_point if w is None else np.asarray(w, dtype=float)

    def score(space, x, y, keep):
        gap = _last_valid(_d(space, x, y) - _d(space, y, w), keep)
        return gap, gap < -max(levels)

    return _refuter("condition_Bprime", space, trials, seed, (0, MAX_DEPTH_OFFSET), score, levels)


def check_axiom4(space, trials=10_000, seed=0, c=5.0, min_points=30):
    """Search for pairs with distinct limits at uniformly bounded distance ``<= c``.

    A pair only counts when at least ``min_points`` representable terms
    were compared, so short sequences cannot pass for bounded ones.
    """
    if trials < 1:
        raise ValueError("trial budget must be >= 1")

    def score(space, x, y, keep):
        sup = np.where(keep, _d(space, x, y), -np.inf).max(axis=1)
        return sup, (sup <= c) & (keep.sum(axis=1) >= min_points)

    return _refuter("axiom4", space, trials, seed, (0, 0), score, (c,))


def replay(space, report):
    """Re-run the proposal that produced a refuting witness."""
    if report.witness is None:
        raise PreconditionNotMet("report carries no witness")
    trial = report.witness["trial"]
    offsets = (0, 0) if report.axiom == "axiom4" else (0, MAX_DEPTH_OFFSET)
    return _proposals(space, trial + 1, report.seed, offsets, start=trial)[0]


def check_condition_C(space, trials=100_000, seed=0, tol=1e-9, batch=20_000):
    """Sampled check that balls are convex: ``d(sx + (1-s)y, z) <= max(d(x, z), d(y, z))``."""
    rng = np.random.default_rng(seed)
    worst, witness, done = -np.inf, None, 0
    while done < trials:
        m = min(batch, trials - done)
        x, y, z = (space.domain.sample_interior(rng, m) for _ in range(3))
        s = rng.uniform(0.0, 1.0, (m, 1))
        comb = s * x + (1 - s) * y
        excess = _d(space, comb, z) - np.maximum(_d(space, x, z), _d(space, y, z))
        i = int(np.argmax(excess))
        if excess[i] > worst:
            worst = float(excess[i])
            witness = {"x": x[i], "y": y[i], "z": z[i], "s": float(s[i, 0]), "excess": worst}
        done += m
    verdict = REFUTED if worst > tol else SUPPORTED_WITHIN_BUDGET
    return AxiomReport("condition_C", verdict, trials, (tol,), {"worst": worst},
                       witness if verdict == REFUTED else None, seed)


def a3star_check(space, seq_x, seq_y, w=None, level=10.0):
    """If the gap runs below ``-level`` the segment between the limits lies in the boundary.

    Returns ``"Consistent"`` or ``"ContradictionFound"``.
    """
    xi, eta = seq_x.target, seq_y.target
    if np.linalg.norm(xi - eta) <= EPS_BND:
        return "Consistent"
    w = space.base_point if w is None else np.asarray(w, dtype=float)
    x, y = _paired(seq_x, seq_y)
    gap = _d(space, x, y) - _d(space, y, w)
    if not gap[-1] < -level:
        raise PreconditionNotMet(f"gap only reached {gap[-1]:.3g}, not below {-level:g}")
    return "Consistent" if segment_in_boundary(space.domain, xi, eta) else "ContradictionFound"
