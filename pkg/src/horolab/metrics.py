"""Hilbert, Thompson and Poincare distances, geodesic points and rays.

All functions broadcast over leading axes: ``x`` and ``y`` may be single
points of shape ``(n,)`` or stacks of shape ``(..., n)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    NonpositiveCoordinate,
    NotOnBoundary,
    ParameterOutOfRange,
    PointOutsideDomain,
)
from .geometry import EPS_BND, EPS_DEG, ConvexBody, Ellipsoid, SimplexSlice

HILBERT_BODY = "hilbert_body"
HILBERT_CONE = "hilbert_cone"
THOMPSON_CONE = "thompson_cone"
POINCARE_DISC = "poincare_disc"
KINDS = (HILBERT_BODY, HILBERT_CONE, THOMPSON_CONE, POINCARE_DISC)

NEAR_BOUNDARY_GUARD = 1e-10
EPS_GEO = 1e-10
EPS_METRIC = 1e-12


@dataclass(frozen=True, eq=False)
class MetricSpace:
    """A domain together with the metric placed on it."""

    kind: str
    domain: ConvexBody
    base_point: np.ndarray

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown metric kind {self.kind!r}")
        base = np.asarray(self.base_point, dtype=float)
        if base.shape != (self.dim,):
            raise DimensionMismatch("base point does not match the domain")
        if not self.domain.contains(base):
            raise PointOutsideDomain("base point must be interior")
        object.__setattr__(self, "base_point", base)

    @classmethod
    def hilbert(cls, body, base_point=None):
        return cls(HILBERT_BODY, body, body.center if base_point is None else base_point)

    @classmethod
    def hilbert_cone(cls, n, base_point=None):
        dom = SimplexSlice(n)
        return cls(HILBERT_CONE, dom, dom.center if base_point is None else base_point)

    @classmethod
    def thompson_cone(cls, n, base_point=None):
        dom = SimplexSlice(n)
        return cls(THOMPSON_CONE, dom, dom.center if base_point is None else base_point)

    @classmethod
    def poincare_disc(cls, base_point=None):
        return cls(POINCARE_DISC, Ellipsoid.ball(2), np.zeros(2) if base_point is None else base_point)

    @property
    def dim(self):
        return self.domain.dim

    @property
    def has_geodesics(self):
        return self.kind != THOMPSON_CONE

    def distance(self, x, y, guard=NEAR_BOUNDARY_GUARD):
        return distance(self, x, y, guard=guard)

    def geodesic_point(self, x, y, t, guard=NEAR_BOUNDARY_GUARD):
        return geodesic_point(self, x, y, t, guard=guard)

    def contains(self, x):
        return self.domain.contains(x)

    def sample(self, rng, size, radial=None):
        return self.domain.sample_interior(rng, size, radial)

    def describe(self):
        return {"kind": self.kind, "domain": type(self.domain).__name__, "dim": self.dim}


def _validate(space, x, guard):
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != space.dim:
        raise DimensionMismatch(f"point has dimension {x.shape[-1]}, space has {space.dim}")
    if not np.all(np.isfinite(x)):
        raise PointOutsideDomain("non-finite coordinates")
    depth = space.domain.depth(x)
    if np.any(~(depth > guard)):
        raise PointOutsideDomain(
            f"point within {guard:g} of the boundary (or outside); depth={np.min(depth):.3g}"
        )
    return x


def _to_complex(z):
    return z[..., 0] + 1j * z[..., 1]


def _from_complex(w):
    return np.stack([w.real, w.imag], axis=-1)


def _scalar(v):
    return float(v) if np.ndim(v) == 0 else v


def cone_M(x, y):
    """``M(x/y) = inf{beta > 0 : x <= beta*y}`` on the positive orthant."""
    x, y = np.asarray(x, float), np.asarray(y, float)
    if np.any(x <= 0) or np.any(y <= 0):
        raise NonpositiveCoordinate("cone ratios need strictly positive coordinates")
    return _scalar(np.max(x / y, axis=-1))


def cone_m(x, y):
    """``m(x/y) = sup{alpha > 0 : alpha*y <= x}`` on the positive orthant."""
    x, y = np.asarray(x, float), np.asarray(y, float)
    if np.any(x <= 0) or np.any(y <= 0):
        raise NonpositiveCoordinate("cone ratios need strictly positive coordinates")
    return _scalar(np.min(x / y, axis=-1))


def _hilbert_chord(domain, x, y):
    d = y - x
    back = domain.exit_time(x, -d)
    ahead = domain.exit_time(y, d)
    with np.errstate(divide="ignore"):
        return np.log1p(1.0 / back) + np.log1p(1.0 / ahead)


def _poincare(x, y):
    z, w = _to_complex(x), _to_complex(y)
    den = np.abs(1.0 - np.conj(w) * z)
    rho = np.abs(z - w) / den
    # 1 - rho^2 from the factored identity avoids cancelling near the rim.
    one_minus = (1.0 - np.abs(z) ** 2) * (1.0 - np.abs(w) ** 2) / den**2
    return np.log1p(rho) - 0.5 * np.log(one_minus)


def distance(space, x, y, guard=NEAR_BOUNDARY_GUARD):
    """Distance between ``x`` and ``y`` in ``space``.

    Raises ``PointOutsideDomain`` for points closer than ``guard`` to the
    boundary, where the cross-ratio loses its significant digits.
    """
    x = _validate(space, x, guard)
    y = _validate(space, y, guard)
    same = np.linalg.norm(x - y, axis=-1) <= EPS_DEG
    if space.kind == HILBERT_BODY:
        with np.errstate(invalid="ignore"):
            val = _hilbert_chord(space.domain, x, y)
    elif space.kind == HILBERT_CONE:
        r = np.log(x) - np.log(y)
        val = r.max(axis=-1) - r.min(axis=-1)
    elif space.kind == THOMPSON_CONE:
        r = np.log(x) - np.log(y)
        val = np.maximum(r.max(axis=-1), -r.min(axis=-1))
    else:
        val = _poincare(x, y)
    return _scalar(np.where(same, 0.0, val))


def _chord_parameter(back, ahead, t):
    """Segment parameter at Hilbert arclength ``t`` from the chord's interior point.

    ``back``/``ahead`` are the exit times behind and ahead of the start point
    in units of the direction vector.
    """
    e = np.exp(-t)
    with np.errstate(over="ignore", invalid="ignore"):
        return back * ahead * (1.0 - e) / (ahead * e + back)


def _mobius_to_origin(z, a):
    return (z - a) / (1.0 - np.conj(a) * z)


def _mobius_from_origin(z, a):
    return (z + a) / (1.0 + np.conj(a) * z)


def geodesic_point(space, x, y, t, guard=NEAR_BOUNDARY_GUARD):
    """Point ``z`` on the geodesic from ``x`` to ``y`` with ``d(x, z) = t``."""
    if not space.has_geodesics:
        raise NotImplementedError("geodesics are not provided for the Thompson metric")
    x = _validate(space, x, guard)
    y = _validate(space, y, guard)
    t = np.asarray(t, dtype=float)
    total = np.asarray(distance(space, x, y, guard=guard))
    if np.any(t < -EPS_GEO) or np.any(t > total + EPS_GEO * np.maximum(1.0, total)):
        raise ParameterOutOfRange("arclength outside [0, d(x, y)]")
    t = np.clip(t, 0.0, total)
    if space.kind == POINCARE_DISC:
        a = _to_complex(x)
        w = _mobius_to_origin(_to_complex(y), a)
        mod = np.abs(w)
        unit = np.where(mod > 0, w / np.where(mod > 0, mod, 1.0), 0.0)
        out = _from_complex(_mobius_from_origin(np.tanh(t) * unit, a))
    else:
        d = y - x
        back = space.domain.exit_time(x, -d)
        ahead = space.domain.exit_time(x, d)
        with np.errstate(invalid="ignore", divide="ignore"):
            u = _chord_parameter(back, ahead, t)
        u = np.where(np.linalg.norm(d, axis=-1) <= EPS_DEG, 0.0, u)
        out = x + np.asarray(u)[..., None] * d
    at_end = np.abs(t - total) <= 0.0
    out = np.where(at_end[..., None], np.broadcast_to(y, out.shape), out)
    at_start = t <= 0.0
    return np.where(at_start[..., None], np.broadcast_to(x, out.shape), out)


@dataclass(frozen=True, eq=False)
class GeodesicRay:
    """Arclength-parametrised geodesic ray from ``origin`` toward a boundary point."""

    space: MetricSpace
    origin: np.ndarray
    target: np.ndarray

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < 0):
            raise ParameterOutOfRange("rays are defined for t >= 0")
        x, xi = self.origin, self.target
        if self.space.kind == POINCARE_DISC:
            a = _to_complex(x)
            end = _mobius_to_origin(_to_complex(xi), a)
            end = end / np.abs(end)
            return _from_complex(_mobius_from_origin(np.tanh(t) * end, a))
        d = xi - x
        back = self.space.domain.exit_time(x, -d)
        ahead = self.space.domain.exit_time(x, d)
        u = _chord_parameter(back, ahead, t)
        return x + np.asarray(u)[..., None] * d


def ray_toward(space, x, xi):
    if not space.has_geodesics:
        raise NotImplementedError("geodesics are not provided for the Thompson metric")
    x = _validate(space, np.asarray(x, float), 0.0)
    xi = np.asarray(xi, dtype=float)
    if xi.shape != (space.dim,):
        raise DimensionMismatch("target does not match the space")
    if space.domain.boundary_residual(xi) > EPS_BND:
        raise NotOnBoundary(f"{xi} is not on the boundary")
    return GeodesicRay(space, x, xi)
