"""Declarative self-maps with known dynamics, and randomised Lipschitz probes."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import IncompatibleMapSpace, ImageEscapedDomain, PointOutsideDomain
from .geometry import Ellipsoid, Polytope
from .metrics import (
    HILBERT_BODY,
    HILBERT_CONE,
    POINCARE_DISC,
    THOMPSON_CONE,
    MetricSpace,
    distance,
    geodesic_point,
)

NONEXPANSIVE_TOL = 1e-8


class MapSpec:
    """Base class. Subclasses implement ``_apply`` on stacks of points."""

    def compatible(self, space):
        raise NotImplementedError

    def _apply(self, space, x):
        raise NotImplementedError

    def describe(self):
        raise NotImplementedError


def _cone_chart(space):
    """How a projective matrix acts on ``space``: ``'cone'``, ``'simplex'`` or None."""
    if space.kind in (HILBERT_CONE, THOMPSON_CONE):
        return "cone"
    if (
        space.kind == HILBERT_BODY
        and isinstance(space.domain, Polytope)
        and space.domain.is_standard_simplex()
    ):
        return "simplex"
    return None


@dataclass(frozen=True, eq=False)
class MatrixProjective(MapSpec):
    """``x -> Ax / sum(Ax)`` on the simplex slice of the positive orthant.

    On the simplex-polytope chart ``{y > 0, sum(y) < 1}`` the omitted last
    coordinate is ``1 - sum(y)``.
    """

    matrix: np.ndarray

    def __post_init__(self):
        a = np.atleast_2d(np.asarray(self.matrix, dtype=float))
        if a.shape[0] != a.shape[1]:
            raise ValueError("matrix must be square")
        if np.any(a < 0):
            raise ValueError("matrix must be nonnegative")
        if np.any(a.sum(axis=0) == 0) or np.any(a.sum(axis=1) == 0):
            raise ValueError("matrix has a zero row or column")
        object.__setattr__(self, "matrix", a)

    def compatible(self, space):
        chart = _cone_chart(space)
        n = self.matrix.shape[0]
        if chart == "cone":
            return space.dim == n
        return chart == "simplex" and space.dim == n - 1

    def _apply(self, space, x):
        if _cone_chart(space) == "simplex":
            full = np.concatenate([x, 1.0 - x.sum(axis=-1, keepdims=True)], axis=-1)
            img = full @ self.matrix.T
            return (img / img.sum(axis=-1, keepdims=True))[..., :-1]
        img = x @ self.matrix.T
        return img / img.sum(axis=-1, keepdims=True)

    def describe(self):
        return {"kind": "matrix_projective", "matrix": self.matrix.tolist()}


def boost_matrix(s, n=2, axis=0):
    """Projective matrix of the hyperbolic translation of length ``2s`` along an axis."""
    b = np.eye(n + 1)
    b[axis, axis] = b[n, n] = np.cosh(s)
    b[axis, n] = b[n, axis] = np.sinh(s)
    return b


def conjugate_projective(matrix, linear, shift=None):
    """Matrix of ``T o f o T^-1`` for the affine map ``T(x) = linear @ x + shift``."""
    linear = np.asarray(linear, dtype=float)
    n = linear.shape[0]
    lift = np.eye(n + 1)
    lift[:n, :n] = linear
    if shift is not None:
        lift[:n, n] = shift
    return lift @ np.asarray(matrix, dtype=float) @ np.linalg.inv(lift)


@dataclass(frozen=True, eq=False)
class KleinIsometry(MapSpec):
    """Projective map ``x -> (B (x,1))[:n] / (B (x,1))[n]``."""

    matrix: np.ndarray

    def __post_init__(self):
        b = np.atleast_2d(np.asarray(self.matrix, dtype=float))
        if b.shape[0] != b.shape[1]:
            raise ValueError("matrix must be square")
        object.__setattr__(self, "matrix", b)

    @classmethod
    def boost(cls, s, n=2, axis=0):
        return cls(boost_matrix(s, n, axis))

    def compatible(self, space):
        return space.kind == HILBERT_BODY and space.dim == self.matrix.shape[0] - 1

    def _apply(self, space, x):
        lifted = np.concatenate([x, np.ones(x.shape[:-1] + (1,))], axis=-1)
        img = lifted @ self.matrix.T
        return img[..., :-1] / img[..., -1:]

    def describe(self):
        return {"kind": "klein_isometry", "matrix": self.matrix.tolist()}


@dataclass(frozen=True, eq=False)
class MobiusDisc(MapSpec):
    """Disc automorphism ``z -> e^{i theta} (z - a) / (1 - conj(a) z)``."""

    a: complex
    theta: float = 0.0

    def __post_init__(self):
        a = complex(self.a)
        if abs(a) >= 1:
            raise ValueError("|a| must be < 1")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "theta", float(self.theta))

    @classmethod
    def parabolic(cls, a):
        """The parabolic member of the family with real parameter ``a``."""
        return cls(a, 2.0 * np.arccos(np.sqrt(1.0 - abs(a) ** 2)))

    @property
    def coefficients(self):
        rot = np.exp(1j * self.theta)
        return rot, -rot * self.a, -np.conj(self.a), 1.0 + 0j

    def __call__(self, z):
        al, be, ga, de = self.coefficients
        return (al * z + be) / (ga * z + de)

    def derivative(self, z):
        al, be, ga, de = self.coefficients
        return (al * de - be * ga) / (ga * z + de) ** 2

    def trace(self):
        """Trace of the normalised SU(1,1) matrix; |trace| = 2 is parabolic."""
        return 2.0 * np.cos(self.theta / 2.0) / np.sqrt(1.0 - abs(self.a) ** 2)

    def classify(self, tol=1e-9):
        tr = abs(self.trace())
        if abs(tr - 2.0) <= tol:
            return "parabolic"
        return "elliptic" if tr < 2.0 else "hyperbolic"

    def fixed_points(self):
        """Roots of ``c z^2 + (d - a) z - b = 0`` for the map's coefficients."""
        al, be, ga, de = self.coefficients
        if abs(ga) == 0:
            return np.array([0j]) if abs(al - de) > 0 else np.array([])
        return np.roots([ga, de - al, -be])

    def denjoy_wolff_point(self):
        """Boundary fixed point with ``|f'| <= 1``; None for elliptic maps."""
        kind = self.classify()
        if kind == "elliptic":
            return None
        pts = self.fixed_points()
        if kind == "parabolic":
            # The double root splits at ~sqrt(eps) under np.roots.
            mid = pts.mean()
            return mid / abs(mid)
        k = int(np.argmin(np.abs(self.derivative(pts))))
        return pts[k] / abs(pts[k])

    def compatible(self, space):
        return space.kind == POINCARE_DISC

    def _apply(self, space, x):
        w = self(x[..., 0] + 1j * x[..., 1])
        return np.stack([w.real, w.imag], axis=-1)

    def describe(self):
        return {"kind": "mobius_disc", "a": [self.a.real, self.a.imag], "theta": self.theta}


@dataclass(frozen=True, eq=False)
class Rotation(MapSpec):
    """Euclidean rotation of the plane by ``angle`` about ``center``."""

    angle: float
    center: tuple = (0.0, 0.0)

    def compatible(self, space):
        return space.dim == 2 and space.kind in (HILBERT_BODY, POINCARE_DISC)

    def _apply(self, space, x):
        c, s = np.cos(self.angle), np.sin(self.angle)
        rot = np.array([[c, -s], [s, c]])
        ctr = np.asarray(self.center, dtype=float)
        return (x - ctr) @ rot.T + ctr

    def describe(self):
        return {"kind": "rotation", "angle": self.angle, "center": list(self.center)}


@dataclass(frozen=True, eq=False)
class GeodesicPull(MapSpec):
    """``x -> geodesic_point(x, p, step * d(x, p))``."""

    target: np.ndarray
    step: float

    def __post_init__(self):
        if not 0.0 < self.step <= 1.0:
            raise ValueError("step must lie in (0, 1]")
        object.__setattr__(self, "target", np.asarray(self.target, dtype=float))

    def compatible(self, space):
        return space.has_geodesics and space.dim == self.target.shape[0]

    def _apply(self, space, x):
        p = np.broadcast_to(self.target, x.shape)
        d = distance(space, x, p, guard=0.0)
        return geodesic_point(space, x, p, self.step * np.asarray(d), guard=0.0)

    def describe(self):
        return {"kind": "geodesic_pull", "target": self.target.tolist(), "step": self.step}


@dataclass(frozen=True, eq=False)
class Composition(MapSpec):
    """Apply ``maps[0]`` first, then ``maps[1]``, and so on."""

    maps: tuple

    def __post_init__(self):
        if not self.maps:
            raise ValueError("empty composition")
        object.__setattr__(self, "maps", tuple(self.maps))

    def compatible(self, space):
        return all(m.compatible(space) for m in self.maps)

    def _apply(self, space, x):
        for m in self.maps:
            x = apply_map(m, space, x)
        return x

    def describe(self):
        return {"kind": "composition", "maps": [m.describe() for m in self.maps]}


@dataclass(frozen=True, eq=False)
class Identity(MapSpec):
    def compatible(self, space):
        return True

    def _apply(self, space, x):
        return x.copy()

    def describe(self):
        return {"kind": "identity"}


def apply_map(fmap, space, x):
    """Image of ``x`` (or a stack of points) under ``fmap``.

    The image must stay strictly inside the domain in floating point;
    otherwise ``ImageEscapedDomain`` is raised.
    """
    if not fmap.compatible(space):
        raise IncompatibleMapSpace(f"{type(fmap).__name__} cannot act on {space.kind}")
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != space.dim:
        raise IncompatibleMapSpace("point dimension does not match the space")
    if np.any(~(space.domain.depth(x) > 0)):
        raise PointOutsideDomain("map applied outside the open domain")
    img = fmap._apply(space, x)
    if np.any(~np.isfinite(img)) or np.any(~(space.domain.depth(img) > 0)):
        raise ImageEscapedDomain("image left the representable interior")
    return img


# ---------------------------------------------------------------------------
# Probes


@dataclass(frozen=True)
class ProbeReport:
    trials: int
    worst_violation: float
    witness: tuple | None
    strict: bool | None = None

    @property
    def nonexpansive(self):
        return self.worst_violation <= NONEXPANSIVE_TOL


def _probe_pairs(space, trials, seed, spread=0.9):
    rng = np.random.default_rng(seed)
    x = space.sample(rng, trials, radial=rng.uniform(0.0, spread, trials))
    y = space.sample(rng, trials, radial=rng.uniform(0.0, spread, trials))
    return x, y


def nonexpansive_probe(fmap, space, trials=10_000, seed=0):
    """Worst observed ``d(fx, fy) - d(x, y)`` over random interior pairs."""
    x, y = _probe_pairs(space, trials, seed)
    before = np.asarray(distance(space, x, y))
    after = np.asarray(distance(space, apply_map(fmap, space, x), apply_map(fmap, space, y), guard=0.0))
    excess = after - before
    k = int(np.argmax(excess))
    return ProbeReport(trials, float(excess[k]), (x[k], y[k]))


def contractive_probe(fmap, space, trials=10_000, seed=0, min_separation=1e-6):
    """Like ``nonexpansive_probe``; ``strict`` says whether every pair got strictly closer.

    "Strictly" means by more than rounding, ``1e-12 * (1 + d)``.
    """
    x, y = _probe_pairs(space, trials, seed)
    before = np.asarray(distance(space, x, y))
    keep = before > min_separation
    x, y, before = x[keep], y[keep], before[keep]
    after = np.asarray(distance(space, apply_map(fmap, space, x), apply_map(fmap, space, y), guard=0.0))
    excess = after - before
    k = int(np.argmax(excess))
    strict = bool(np.all(excess < -1e-12 * (1.0 + before)))
    return ProbeReport(int(keep.sum()), float(excess[k]), (x[k], y[k]), strict)


# ---------------------------------------------------------------------------
# Reference library with known ground truth


@dataclass(frozen=True, eq=False)
class LibraryEntry:
    name: str
    fmap: MapSpec
    space: MetricSpace
    start: np.ndarray
    expected: str  # "bounded" or "escaping"
    limit: np.ndarray | None = None


def standard_library():
    """Maps whose orbit behaviour is known in closed form."""
    disc = MetricSpace.hilbert(Ellipsoid.ball(2))
    poinc = MetricSpace.poincare_disc()
    cone2 = MetricSpace.hilbert_cone(2)
    tri = MetricSpace.hilbert(Polytope.simplex(2))
    g = (np.sqrt(5.0) - 1.0) / 2.0
    return [
        LibraryEntry("rotation", Rotation(np.pi / 2), disc, np.array([0.5, 0.0]), "bounded"),
        LibraryEntry("irrational_rotation", Rotation(np.sqrt(2.0)), poinc, np.array([0.3, 0.4]), "bounded"),
        LibraryEntry("elliptic_mobius", MobiusDisc(0.3, np.pi / 2), poinc, np.array([0.2, -0.1]), "bounded"),
        LibraryEntry(
            "parabolic_mobius", MobiusDisc.parabolic(0.6), poinc, np.array([0.0, 0.0]), "escaping",
            limit=None,
        ),
        LibraryEntry(
            "hyperbolic_mobius", MobiusDisc(-0.5, 0.0), poinc, np.array([0.0, 0.0]), "escaping",
            limit=np.array([1.0, 0.0]),
        ),
        LibraryEntry(
            "boost", KleinIsometry.boost(0.3), disc, np.array([0.0, 0.0]), "escaping",
            limit=np.array([1.0, 0.0]),
        ),
        LibraryEntry(
            "positive_matrix", MatrixProjective([[2.0, 1.0], [1.0, 1.0]]), cone2,
            np.array([0.5, 0.5]), "bounded", limit=np.array([1.0, g]) / (1.0 + g),
        ),
        LibraryEntry(
            "reducible_matrix", MatrixProjective([[2.0, 1.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]),
            tri, np.array([0.3, 0.3]), "escaping", limit=np.array([1.0, 0.0]),
        ),
        LibraryEntry(
            "geodesic_pull", GeodesicPull(np.array([0.2, 0.1]), 0.5), poinc,
            np.array([-0.6, 0.3]), "bounded", limit=np.array([0.2, 0.1]),
        ),
    ]
