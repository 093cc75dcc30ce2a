"""Bounded convex domains in R^n and the chord/face predicates built on them.

Every body exposes the same small vectorised interface:

``contains(x)``
    strict interiority, tolerance ``EPS_INT``.
``exit_time(x, d)``
    the largest ``t`` with ``x + t*d`` in the closed body.
``depth(x)``
    a lower bound on the Euclidean distance from ``x`` to the boundary.
``boundary_residual(x)``
    how far ``x`` is from satisfying the boundary equation.

Points are plain numpy arrays; boundary points are ordinary points that pass
the residual check.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .errors import DegenerateChord, DimensionMismatch, NotInterior, NotOnBoundary

EPS_INT = 1e-12
EPS_BND = 1e-9
EPS_DEG = 1e-12
# Closest approach to the boundary that double precision still resolves.
REPRESENTABLE_DEPTH = 1e-14


def as_point(x, dim=None):
    p = np.asarray(x, dtype=float)
    if p.ndim != 1:
        raise DimensionMismatch(f"expected a 1-D point, got shape {p.shape}")
    if dim is not None and p.shape[0] != dim:
        raise DimensionMismatch(f"point has dimension {p.shape[0]}, body has {dim}")
    if not np.all(np.isfinite(p)):
        raise ValueError("point has non-finite coordinates")
    return p


class ConvexBody:
    """Common surface of the concrete bodies below."""

    dim: int
    strictly_convex: bool

    def _check(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dim:
            raise DimensionMismatch(
                f"point has dimension {x.shape[-1]}, body has {self.dim}"
            )
        return x

    def contains(self, x):
        return self.depth(x) > EPS_INT

    def on_boundary(self, x, tol=EPS_BND):
        return self.boundary_residual(x) <= tol

    def boundary_point(self, direction, origin=None):
        """Point where the ray from ``origin`` along ``direction`` leaves the body."""
        origin = self.center if origin is None else self._check(origin)
        direction = self._check(direction)
        t = self.exit_time(origin, direction)
        return origin + np.asarray(t)[..., None] * direction

    def sample_interior(self, rng, size, radial=None):
        """Points ``center + u * (boundary - center)`` along random directions.

        ``radial`` gives the fractions ``u``; by default ``u`` is uniform on
        ``[0, 1)``.
        """
        dirs = rng.standard_normal((size, self.dim))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        u = rng.uniform(0.0, 1.0, size) if radial is None else np.asarray(radial, float)
        t = self.exit_time(np.broadcast_to(self.center, dirs.shape), dirs)
        return self.center + (u * t)[:, None] * dirs

    def sample_boundary(self, rng, size):
        dirs = rng.standard_normal((size, self.dim))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        return self.boundary_point(dirs)


@dataclass(frozen=True, eq=False)
class Polytope(ConvexBody):
    """Open polytope ``{x : a_i . x < b_i}`` with unit normals ``a_i``."""

    normals: np.ndarray
    offsets: np.ndarray
    center: np.ndarray = field(init=False)
    lower: np.ndarray = field(init=False)
    upper: np.ndarray = field(init=False)
    strictly_convex = False

    def __post_init__(self):
        a = np.atleast_2d(np.asarray(self.normals, dtype=float))
        b = np.asarray(self.offsets, dtype=float).reshape(-1)
        if a.shape[0] != b.shape[0]:
            raise ValueError("normals and offsets disagree in count")
        norms = np.linalg.norm(a, axis=1)
        if np.any(norms == 0):
            raise ValueError("zero half-space normal")
        a = a / norms[:, None]
        b = b / norms
        object.__setattr__(self, "normals", a)
        object.__setattr__(self, "offsets", b)
        n = a.shape[1]
        # Chebyshev centre: maximise r subject to a_i.x + r <= b_i.
        res = linprog(
            np.r_[np.zeros(n), -1.0],
            A_ub=np.c_[a, np.ones(len(b))],
            b_ub=b,
            bounds=[(None, None)] * n + [(0, None)],
            method="highs",
        )
        if res.status == 3:
            raise ValueError("polytope is unbounded")
        if res.status != 0 or res.x[-1] <= EPS_INT:
            raise ValueError("polytope has empty interior")
        object.__setattr__(self, "center", res.x[:n])
        lo, hi = np.empty(n), np.empty(n)
        for j in range(n):
            for sign, out in ((1.0, lo), (-1.0, hi)):
                c = np.zeros(n)
                c[j] = sign
                r = linprog(c, A_ub=a, b_ub=b, bounds=[(None, None)] * n, method="highs")
                if r.status != 0:
                    raise ValueError("polytope is unbounded")
                out[j] = r.x[j]
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dim(self):
        return self.normals.shape[1]

    @classmethod
    def box(cls, lower, upper):
        lower = np.asarray(lower, dtype=float)
        upper = np.asarray(upper, dtype=float)
        n = lower.shape[0]
        eye = np.eye(n)
        return cls(np.vstack([eye, -eye]), np.r_[upper, -lower])

    @classmethod
    def square(cls, half_width=1.0):
        return cls.box([-half_width] * 2, [half_width] * 2)

    @classmethod
    def simplex(cls, n):
        """``{y in R^n : y_i > 0, sum(y) < 1}``, the chart of the (n+1)-simplex slice."""
        return cls(np.vstack([-np.eye(n), np.ones(n)]), np.r_[np.zeros(n), 1.0])

    def is_standard_simplex(self):
        ref = Polytope.simplex(self.dim)
        if ref.normals.shape != self.normals.shape:
            return False
        mine = {tuple(np.round(np.r_[a, b], 12)) for a, b in zip(self.normals, self.offsets)}
        theirs = {tuple(np.round(np.r_[a, b], 12)) for a, b in zip(ref.normals, ref.offsets)}
        return mine == theirs

    def slack(self, x):
        x = self._check(x)
        return self.offsets - x @ self.normals.T

    def depth(self, x):
        return self.slack(x).min(axis=-1)

    def boundary_residual(self, x):
        return np.abs(self.depth(x))

    def exit_time(self, x, d):
        x = self._check(x)
        d = self._check(d)
        slack = self.offsets - x @ self.normals.T
        rate = d @ self.normals.T
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            t = np.where(rate > 0, slack / rate, np.inf)
        return t.min(axis=-1)

    def active_faces(self, xi, tol=EPS_BND):
        return np.flatnonzero(np.abs(self.slack(xi)) <= tol)

    def bounding_box(self):
        return self.lower.copy(), self.upper.copy()

    def transformed(self, matrix, shift=None):
        matrix = np.asarray(matrix, dtype=float)
        shift = np.zeros(self.dim) if shift is None else np.asarray(shift, float)
        inv = np.linalg.inv(matrix)
        a = self.normals @ inv
        return Polytope(a, self.offsets + a @ shift)


@dataclass(frozen=True, eq=False)
class Ellipsoid(ConvexBody):
    """Open ellipsoid ``{x : (x-c)^T Q (x-c) < 1}``."""

    center: np.ndarray
    shape: np.ndarray
    strictly_convex = True

    def __post_init__(self):
        c = np.asarray(self.center, dtype=float).reshape(-1)
        q = np.atleast_2d(np.asarray(self.shape, dtype=float))
        if q.shape != (c.shape[0], c.shape[0]):
            raise DimensionMismatch("shape matrix does not match centre")
        if not np.allclose(q, q.T, rtol=0, atol=1e-12):
            raise ValueError("shape matrix must be symmetric")
        eig = np.linalg.eigvalsh(q)
        if eig.min() <= 0:
            raise ValueError("shape matrix must be positive definite")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "shape", q)
        object.__setattr__(self, "_lip", float(np.sqrt(eig.max())))

    @classmethod
    def ball(cls, n=2, radius=1.0, center=None):
        c = np.zeros(n) if center is None else center
        return cls(c, np.eye(n) / radius**2)

    @classmethod
    def axes(cls, semi_axes, center=None):
        semi_axes = np.asarray(semi_axes, dtype=float)
        c = np.zeros(len(semi_axes)) if center is None else center
        return cls(c, np.diag(1.0 / semi_axes**2))

    @property
    def dim(self):
        return self.center.shape[0]

    def quadratic(self, x):
        v = self._check(x) - self.center
        return np.einsum("...i,ij,...j->...", v, self.shape, v)

    def depth(self, x):
        return (1.0 - np.sqrt(self.quadratic(x))) / self._lip

    def boundary_residual(self, x):
        return np.abs(self.quadratic(x) - 1.0)

    def exit_time(self, x, d):
        v = self._check(x) - self.center
        d = self._check(d)
        qd = d @ self.shape
        alpha = np.einsum("...i,...i->...", qd, d)
        beta = np.einsum("...i,...i->...", qd, v)
        gamma = np.einsum("...i,ij,...j->...", v, self.shape, v) - 1.0
        root = np.sqrt(np.maximum(beta * beta - alpha * gamma, 0.0))
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where(beta <= 0, (root - beta) / alpha, -gamma / (beta + root))
        return np.where(alpha > 0, t, np.inf)

    def bounding_box(self):
        half = np.sqrt(np.diag(np.linalg.inv(self.shape)))
        return self.center - half, self.center + half

    def transformed(self, matrix, shift=None):
        matrix = np.asarray(matrix, dtype=float)
        shift = np.zeros(self.dim) if shift is None else np.asarray(shift, float)
        inv = np.linalg.inv(matrix)
        q = inv.T @ self.shape @ inv
        return Ellipsoid(matrix @ self.center + shift, (q + q.T) / 2)


@dataclass(frozen=True, eq=False)
class PBall(ConvexBody):
    """Open p-ball ``{x : sum |x_i - c_i|^p < rho^p}``, ``p`` in (1, inf)."""

    center: np.ndarray
    radius: float
    p: float
    strictly_convex = True
    max_iter = 80

    def __post_init__(self):
        c = np.asarray(self.center, dtype=float).reshape(-1)
        if self.radius <= 0:
            raise ValueError("radius must be positive")
        if not 1.0 < self.p < np.inf:
            raise ValueError("exponent must lie in (1, inf)")
        object.__setattr__(self, "center", c)
        # Euclidean Lipschitz constant of the p-norm.
        lip = max(1.0, c.shape[0] ** (1.0 / self.p - 0.5))
        object.__setattr__(self, "_lip", lip)

    @property
    def dim(self):
        return self.center.shape[0]

    def _pnorm(self, v):
        return np.sum(np.abs(v) ** self.p, axis=-1) ** (1.0 / self.p)

    def depth(self, x):
        v = self._check(x) - self.center
        return (self.radius - self._pnorm(v)) / self._lip

    def boundary_residual(self, x):
        v = (self._check(x) - self.center) / self.radius
        return np.abs(np.sum(np.abs(v) ** self.p, axis=-1) - 1.0)

    def exit_time(self, x, d):
        u = (self._check(x) - self.center) / self.radius
        e = self._check(d) / self.radius
        u, e = np.broadcast_arrays(u, e)
        p = self.p
        with np.errstate(all="ignore"):
            return self._newton_exit(u, e, p)

    def _newton_exit(self, u, e, p):

        # The largest coordinate carries the "- 1": its gap |u_k| - 1 is exact
        # in floating point, so near the boundary the residual keeps full
        # relative accuracy instead of rounding at the scale of 1.
        k = np.argmax(np.abs(u), axis=-1)[..., None]
        uk = np.take_along_axis(u, k, axis=-1)[..., 0]
        ek = np.take_along_axis(e, k, axis=-1)[..., 0]
        sk = np.where(uk < 0, -1.0, 1.0)
        gap = np.abs(uk) - 1.0
        others = np.ones(u.shape, dtype=bool)
        np.put_along_axis(others, k, False, axis=-1)

        def g(t):
            a = gap + t * sk * ek
            lead = np.where(a > -0.5, np.expm1(p * np.log1p(np.maximum(a, -0.5))), np.abs(1.0 + a) ** p - 1.0)
            rest = np.sum(np.where(others, np.abs(u + t[..., None] * e) ** p, 0.0), axis=-1)
            return lead + rest

        def dg(t):
            w = u + t[..., None] * e
            return p * np.sum(np.abs(w) ** (p - 1) * np.sign(w) * e, axis=-1)

        norm_u = np.sum(np.abs(u) ** p, axis=-1) ** (1 / p)
        norm_e = np.sum(np.abs(e) ** p, axis=-1) ** (1 / p)
        with np.errstate(divide="ignore", invalid="ignore"):
            hi = (1.0 + norm_u) / norm_e
        lo = np.zeros_like(hi)
        t = hi.copy()
        # Newton from the right of the root is monotone for a convex g;
        # the bracket only guards against rounding.
        for _ in range(self.max_iter):
            gt = g(t)
            lo = np.where(gt < 0, t, lo)
            hi = np.where(gt >= 0, t, hi)
            with np.errstate(divide="ignore", invalid="ignore"):
                step = t - gt / dg(t)
            bad = ~np.isfinite(step) | (step < lo) | (step > hi)
            new = np.where(bad, 0.5 * (lo + hi), step)
            eps = np.finfo(float).eps
            # g is a difference with 1, so |g| at a few ulps is rounding noise
            done = (np.abs(new - t) <= 4 * eps * np.maximum(np.abs(t), 1e-300)) | (np.abs(gt) <= 4 * eps)
            t = new
            if np.all(done | (hi - lo <= 0)):
                break
        return np.where(norm_e > 0, t, np.inf)

    def bounding_box(self):
        return self.center - self.radius, self.center + self.radius

    def transformed(self, matrix, shift=None):
        matrix = np.asarray(matrix, dtype=float)
        scale = matrix[0, 0]
        if not np.allclose(matrix, scale * np.eye(self.dim)) or scale <= 0:
            raise NotImplementedError("p-balls are closed only under similarities")
        shift = np.zeros(self.dim) if shift is None else np.asarray(shift, float)
        return PBall(scale * self.center + shift, scale * self.radius, self.p)


@dataclass(frozen=True, eq=False)
class SimplexSlice(ConvexBody):
    """``{x in R^n : x_i > 0, sum(x) = 1}``, the positive-orthant cone slice.

    Lower dimensional inside R^n; directions used with it must sum to zero.
    """

    n: int
    strictly_convex = False
    sum_tol = 1e-9

    @property
    def dim(self):
        return self.n

    @property
    def center(self):
        return np.full(self.n, 1.0 / self.n)

    def depth(self, x):
        x = self._check(x)
        off = np.abs(x.sum(axis=-1) - 1.0) > self.sum_tol
        return np.where(off, -np.inf, x.min(axis=-1))

    def boundary_residual(self, x):
        x = self._check(x)
        return np.abs(x.min(axis=-1)) + np.abs(x.sum(axis=-1) - 1.0)

    def exit_time(self, x, d):
        x = self._check(x)
        d = self._check(d)
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where(d < 0, x / -d, np.inf)
        return t.min(axis=-1)

    def sample_interior(self, rng, size, radial=None):
        dirs = rng.standard_normal((size, self.n))
        dirs -= dirs.mean(axis=1, keepdims=True)
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        u = rng.uniform(0.0, 1.0, size) if radial is None else np.asarray(radial, float)
        t = self.exit_time(np.broadcast_to(self.center, dirs.shape), dirs)
        return self.center + (u * t)[:, None] * dirs

    def sample_boundary(self, rng, size):
        return self.sample_interior(rng, size, radial=np.ones(size))

    def bounding_box(self):
        return np.zeros(self.n), np.ones(self.n)


# ---------------------------------------------------------------------------
# Chords, faces and segment predicates


@dataclass(frozen=True)
class Chord:
    """Boundary endpoints of the line through ``x`` and ``y``.

    ``x`` lies between ``a`` and ``y``; ``y`` lies between ``x`` and ``b``.
    ``back`` and ``ahead`` are the parameters ``s_x = |x-a|/|y-x|`` and
    ``s_y = |y-b|/|y-x|``.
    """

    a: np.ndarray
    b: np.ndarray
    back: float
    ahead: float


def contains(body, x):
    x = as_point(x)
    if x.shape[0] != body.dim:
        raise DimensionMismatch(f"point has dimension {x.shape[0]}, body has {body.dim}")
    return bool(body.contains(x))


def chord_endpoints(body, x, y):
    x = as_point(x, body.dim)
    y = as_point(y, body.dim)
    d = y - x
    if np.linalg.norm(d) <= EPS_DEG:
        raise DegenerateChord("x and y coincide")
    if not (body.contains(x) and body.contains(y)):
        raise NotInterior("chord endpoints requested for a non-interior point")
    back = float(body.exit_time(x, -d))
    ahead = float(body.exit_time(y, d))
    return Chord(x - back * d, y + ahead * d, back, ahead)


def _require_boundary(body, *pts):
    for p in pts:
        if body.boundary_residual(p) > EPS_BND:
            raise NotOnBoundary(f"{p} is not on the boundary")


def segment_in_boundary(body, xi, eta, m=16):
    """True iff ``m`` equispaced interior samples of ``(xi, eta)`` lie on the boundary."""
    xi = as_point(xi, body.dim)
    eta = as_point(eta, body.dim)
    _require_boundary(body, xi, eta)
    s = np.arange(1, m + 1) / (m + 1)
    samples = (1 - s)[:, None] * xi + s[:, None] * eta
    return bool(np.all(body.boundary_residual(samples) <= EPS_BND))


def ch_membership(body, xi, x):
    """Whether ``x`` belongs to ch(xi), the boundary points joined to xi inside the boundary."""
    return segment_in_boundary(body, x, xi)


@dataclass(frozen=True)
class FaceSet:
    body: Polytope
    active_indices: frozenset


def face_set(body, xi):
    xi = as_point(xi, body.dim)
    _require_boundary(body, xi)
    return FaceSet(body, frozenset(int(i) for i in body.active_faces(xi)))


@dataclass(frozen=True)
class ConvexityVerdict:
    verdict: str  # "NotStrictlyConvex" or "NoCounterexampleFound"
    trials: int
    witness: tuple | None = None


def strict_convexity_probe(body, trials=1000, seed=0):
    """Randomised refuter: look for a boundary pair whose midpoint is on the boundary.

    A clean run is not a certificate of strict convexity.
    """
    rng = np.random.default_rng(seed)
    pts = body.sample_boundary(rng, 2 * trials).reshape(trials, 2, body.dim)
    mids = pts.mean(axis=1)
    apart = np.linalg.norm(pts[:, 0] - pts[:, 1], axis=1) > 1e-6
    hits = np.flatnonzero(apart & (body.boundary_residual(mids) <= EPS_BND))
    if hits.size:
        k = hits[0]
        return ConvexityVerdict("NotStrictlyConvex", trials, (pts[k, 0], pts[k, 1]))
    return ConvexityVerdict("NoCounterexampleFound", trials)
